"""Newton continuation for the smooth planar measure equation.

The unknown is a periodic support sample h on N uniform angles.  The
equation matches the arc-length density of the L_p Gaussian surface area
measure,

    (1/2pi) h^(1-p) exp(-((Dh)^2 + h^2)/2) (D^2 h + h) = f(theta),

to a prescribed positive density f, with D the periodic central difference.
A homotopy f_t = (1-t) c0 + t f starts from the constant solution h = r0 on
the branch whose ball has Gaussian volume above 1/2 and tracks it to t = 1
with damped Newton steps, halving the continuation step when a Newton solve
fails.  The linearization at the constant start is the periodic operator
D^2 + (2-p) - r0^2 up to a positive prefactor; a start is rejected when its
spectrum (2-p) - r0^2 - k^2 comes within 1e-8 of zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded
from scipy.optimize import brentq

from .errors import (
    ConvexityError,
    MassBoundError,
    NoConstantSolutionError,
    SolverStallError,
    WrongBranchError,
)
from .gaussian import (
    constant_field_density,
    field_gauss_volume,
    gauss_constants,
    smooth_lp_density,
)
from .geometry import TWO_PI, SupportField
from .report import SolveReport

logger = logging.getLogger(__name__)

GOLDEN_RATIO = 0.5 * (1.0 + math.sqrt(5.0))

# upper end of the radius window scanned for constant starts; Gaussian decay
# makes larger balls useless as homotopy anchors
R_STAR_CEILING = 3.0

_GUARD_TOL = 1e-8


@dataclass(frozen=True)
class HomotopyOptions:
    """Continuation settings for solve_homotopy."""

    resolution: int = 256
    t_step_initial: float = 0.25
    t_step_min: float = 1e-4
    newton_tol: float = 1e-11
    newton_max_iters: int = 30
    branch: str = "upper"
    r_star: float | None = None

    def __post_init__(self):
        if self.resolution < 64 or self.resolution % 2 != 0:
            raise ValueError("resolution must be an even integer >= 64")
        if not 0.0 < self.t_step_min <= self.t_step_initial <= 1.0:
            raise ValueError("need 0 < t_step_min <= t_step_initial <= 1")
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iters < 1:
            raise ValueError("newton_max_iters must be at least 1")
        if self.branch != "upper":
            raise ValueError("only the upper branch (volume > 1/2) is supported")
        if self.r_star is not None and not self.r_star > 0.0:
            raise ValueError("r_star override must be positive")


@dataclass(frozen=True)
class HomotopyStep:
    """One accepted continuation step with its certification data."""

    t: float
    newton_iters: int
    residual: float
    min_convexity: float
    gauss_volume: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError("t must lie in [0, 1]")
        if self.newton_iters < 0:
            raise ValueError("newton_iters must be nonnegative")
        if not (math.isfinite(self.residual) and self.residual >= 0.0):
            raise ValueError("residual must be finite and nonnegative")
        if not self.min_convexity > 0.0:
            raise ValueError("accepted step must have positive convexity surrogate")
        if not self.gauss_volume > 0.5:
            raise ValueError("accepted step must have Gaussian volume above 1/2")


@dataclass(frozen=True)
class HomotopyTrace:
    """Certified continuation path: t strictly increasing, ending at 1."""

    steps: tuple[HomotopyStep, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValueError("trace must contain at least one step")
        t = np.array([s.t for s in steps])
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("t must be strictly increasing along the trace")
        if t[-1] != 1.0:
            raise ValueError("trace must end at t = 1")
        object.__setattr__(self, "steps", steps)


def constant_branch_start(c0: float, p: float) -> float:
    """Radius of the constant solution h = r0 on the volume > 1/2 branch.

    Solves (1/2pi) r^(2-p) e^{-r^2/2} = c0 for the largest root.  For p < 2
    the left side peaks at r = sqrt(2-p); for p >= 2 it is strictly
    decreasing.  The root must exceed the half-volume radius so the starting
    ball carries Gaussian volume above 1/2.
    """
    if c0 <= 0.0 or not math.isfinite(c0):
        raise ValueError("c0 must be positive and finite")
    if p <= 0.0:
        raise ValueError("p must be positive")
    if p < 2.0:
        lo = math.sqrt(2.0 - p)
        if c0 >= constant_field_density(lo, p):
            raise NoConstantSolutionError(
                f"c0 = {c0:.6g} is not below the peak density "
                f"{constant_field_density(lo, p):.6g} at r = {lo:.6g}"
            )
    else:
        lo = 1e-8
        if c0 >= constant_field_density(lo, p):
            raise NoConstantSolutionError(
                f"c0 = {c0:.6g} exceeds the constant density map near r = 0"
            )
    hi = max(2.0 * lo, 1.0)
    while constant_field_density(hi, p) >= c0:
        hi *= 2.0
        if hi > 64.0:
            raise NoConstantSolutionError("no radius matches c0 below r = 64")
    r0 = brentq(lambda r: constant_field_density(r, p) - c0, lo, hi,
                xtol=1e-14, rtol=8.9e-16)
    r_half = gauss_constants(2, p).r_half
    if r0 <= r_half:
        gamma = -math.expm1(-0.5 * r0 * r0)
        raise WrongBranchError(
            f"largest root r0 = {r0:.6g} has Gaussian volume {gamma:.6g} <= 1/2"
        )
    return float(r0)


def linearized_guard(r0: float, p: float, resolution: int) -> bool:
    """True when the linearization at h = r0 has no near-zero eigenvalue.

    The periodic operator D^2 + ((2-p) - r0^2) is singular exactly when
    (2-p) - r0^2 = -k^2 for an integer mode k; modes up to resolution/2 are
    representable on the grid.
    """
    if r0 <= 0.0:
        raise ValueError("r0 must be positive")
    k = np.arange(resolution // 2 + 1, dtype=float)
    return bool(np.min(np.abs((2.0 - p) - r0 * r0 + k * k)) > _GUARD_TOL)


def residual(field: SupportField, f, p: float) -> np.ndarray:
    """Pointwise defect smooth_lp_density(field, p) - f on the field's grid."""
    f = np.asarray(f, dtype=float)
    if f.shape != (field.resolution,):
        raise ValueError("f must be sampled on the field's grid")
    return smooth_lp_density(field, p) - f


def _jacobian_bands(h: np.ndarray, step: float, p: float):
    """Cyclic tridiagonal bands of d(density)/dh.

    With A = (1/2pi) h^(1-p) e^{-(d^2+h^2)/2} and w = D^2 h + h the density
    is rho = A w, and the three-point stencils of d and w give

        d rho_k / d h_k      = rho ((1-p)/h - h) + A (1 - 2/step^2)
        d rho_k / d h_{k+-1} = -+ rho d / (2 step) + A / step^2.
    """
    d = (np.roll(h, -1) - np.roll(h, 1)) / (2.0 * step)
    w = (np.roll(h, -1) - 2.0 * h + np.roll(h, 1)) / (step * step) + h
    a = h ** (1.0 - p) * np.exp(-0.5 * (d * d + h * h)) / TWO_PI
    rho = a * w
    diag = rho * ((1.0 - p) / h - h) + a * (1.0 - 2.0 / step**2)
    sup = -rho * d / (2.0 * step) + a / step**2
    sub = rho * d / (2.0 * step) + a / step**2
    return sub, diag, sup


def _solve_cyclic_tridiagonal(sub, diag, sup, rhs):
    """Direct solve of the periodic tridiagonal system via rank-one repair.

    The wraparound corners J[0,n-1] = sub[0] and J[n-1,0] = sup[n-1] are
    split off as an outer product u v^T, the remaining band is factored with
    solve_banded, and the Sherman-Morrison identity restores the corners.
    """
    n = len(diag)
    corner_top = sub[0]
    corner_bot = sup[n - 1]
    gamma = -diag[0] if diag[0] != 0.0 else 1.0
    band = np.zeros((3, n))
    band[0, 1:] = sup[:-1]
    band[1, :] = diag
    band[1, 0] -= gamma
    band[1, n - 1] -= corner_top * corner_bot / gamma
    band[2, :-1] = sub[1:]
    try:
        y = solve_banded((1, 1), band, rhs)
        u = np.zeros(n)
        u[0] = gamma
        u[n - 1] = corner_bot
        q = solve_banded((1, 1), band, u)
    except (LinAlgError, ValueError) as exc:
        raise SolverStallError(
            "singular linearization, likely an eigenvalue collision; "
            "try a smaller continuation step"
        ) from exc
    denom = 1.0 + q[0] + corner_top / gamma * q[n - 1]
    correction = (y[0] + corner_top / gamma * y[n - 1]) / denom
    delta = y - correction * q
    if abs(denom) < 1e-12 or not np.all(np.isfinite(delta)):
        raise SolverStallError(
            "singular linearization, likely an eigenvalue collision; "
            "try a smaller continuation step"
        )
    return delta


def newton_step(field: SupportField, f, p: float) -> SupportField:
    """One damped Newton update h <- h - t J^{-1} G toward density f.

    The full step is halved (at most 20 times) until the residual max-norm
    decreases and the candidate stays a valid convex field.  Raises
    SolverStallError when no damping level helps; the continuation driver
    reacts by shrinking its t-step.
    """
    defect = residual(field, f, p)
    base = float(np.max(np.abs(defect)))
    sub, diag, sup = _jacobian_bands(field.h, field.step, p)
    delta = _solve_cyclic_tridiagonal(sub, diag, sup, defect)
    if not np.any(delta):
        return field
    t = 1.0
    for _ in range(20):
        candidate = field.h - t * delta
        try:
            trial = SupportField(field.resolution, candidate, field.p_exponent)
        except (ConvexityError, ValueError):
            t *= 0.5
            continue
        if float(np.max(np.abs(residual(trial, f, p)))) < base:
            return trial
        t *= 0.5
    raise SolverStallError(
        "damped Newton step failed to reduce the residual; "
        "try a smaller continuation step"
    )


def _newton_solve(field, f_target, p, opts):
    """Newton iteration to residual max-norm <= newton_tol; returns (field, iters)."""
    current = field
    for it in range(opts.newton_max_iters + 1):
        if float(np.max(np.abs(residual(current, f_target, p)))) <= opts.newton_tol:
            return current, it
        current = newton_step(current, f_target, p)
    raise SolverStallError(
        f"Newton did not reach tolerance in {opts.newton_max_iters} iterations"
    )


def _choose_constant_start(p, opts, flags):
    """Admissible constant-start radius on the volume > 1/2 branch.

    Default is the midpoint of [branch floor, R_STAR_CEILING]; a candidate
    failing the invertibility guard or falling off the branch is replaced by
    golden-ratio hops through the same window, each replacement logged.
    """
    r_half = gauss_constants(2, p).r_half
    floor = max(r_half, math.sqrt(2.0 - p)) if p < 2.0 else r_half
    width = R_STAR_CEILING - floor
    if opts.r_star is not None:
        r_star = opts.r_star
        u = (r_star - floor) / width if floor < r_star < R_STAR_CEILING else 0.5
    else:
        r_star = floor + 0.5 * width
        u = 0.5
    for _ in range(64):
        if not linearized_guard(r_star, p, opts.resolution):
            reason = "eigenvalue collision in the linearized operator"
        elif r_star <= floor + 1e-9 or r_star > R_STAR_CEILING:
            reason = "constant start off the certified branch"
        else:
            return r_star
        u = (u + 1.0 / GOLDEN_RATIO) % 1.0
        replacement = floor + u * width
        message = (f"c0 re-chosen: r* = {r_star:.6g} rejected ({reason}), "
                   f"trying r* = {replacement:.6g}")
        logger.info(message)
        flags.append(message)
        r_star = replacement
    raise SolverStallError("no admissible constant start found in 64 attempts")


def solve_homotopy(f, p: float, opts: HomotopyOptions | None = None) -> SolveReport:
    """Track the constant solution to a solution of density = f.

    f is sampled on the uniform angle grid of the options' resolution and
    must be positive with total mass below the solvability threshold; the
    threshold check runs before any continuation step.  The returned report
    carries the solution field, the max-norm equation residual, the volume
    margin above 1/2, and the certified continuation trace.
    """
    f = np.asarray(f, dtype=float)
    if opts is None:
        opts = HomotopyOptions(resolution=len(f))
    if f.shape != (opts.resolution,):
        raise ValueError("f must be sampled on the options' resolution grid")
    if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
        raise ValueError("f must be positive and finite")
    if p <= 0.0:
        raise ValueError("p must be positive")

    flags: list[str] = []
    if p < 1.0:
        flags.append("uncertified")
    half = opts.resolution // 2
    if float(np.max(np.abs(f - np.roll(f, half)))) > 1e-12 * float(np.max(f)):
        flags.append("no-uniqueness-certificate")

    total_mass = TWO_PI * float(np.mean(f))
    bound = gauss_constants(2, p).mass_bound
    if total_mass >= bound:
        raise MassBoundError(
            f"total mass {total_mass:.6g} is not below the solvability "
            f"threshold {bound:.6g} for p = {p:g}"
        )

    r0 = _choose_constant_start(p, opts, flags)
    c0 = constant_field_density(r0, p)
    field = SupportField(opts.resolution, np.full(opts.resolution, r0))
    steps = [
        HomotopyStep(
            t=0.0,
            newton_iters=0,
            residual=float(np.max(np.abs(residual(field, np.full(opts.resolution, c0), p)))),
            min_convexity=field.min_convexity(),
            gauss_volume=field_gauss_volume(field),
        )
    ]

    t = 0.0
    dt = opts.t_step_initial
    total_newton = 0
    while t < 1.0:
        t_next = min(1.0, t + dt)
        f_target = (1.0 - t_next) * c0 + t_next * f
        try:
            new_field, iters = _newton_solve(field, f_target, p, opts)
        except SolverStallError:
            dt *= 0.5
            if dt < opts.t_step_min:
                raise SolverStallError(
                    f"continuation step fell below t_step_min = "
                    f"{opts.t_step_min:g} at t = {t:.6g}",
                    trace=list(steps),
                ) from None
            continue
        gamma = field_gauss_volume(new_field)
        if gamma <= 0.5:
            raise SolverStallError(
                f"path lost the volume certificate at t = {t_next:.6g}: "
                f"gauss volume {gamma:.6g} <= 1/2",
                trace=list(steps),
            )
        steps.append(
            HomotopyStep(
                t=t_next,
                newton_iters=iters,
                residual=float(np.max(np.abs(residual(new_field, f_target, p)))),
                min_convexity=new_field.min_convexity(),
                gauss_volume=gamma,
            )
        )
        field = new_field
        total_newton += iters
        t = t_next
        if iters <= 4:
            dt = min(2.0 * dt, opts.t_step_initial)

    trace = HomotopyTrace(tuple(steps))
    density = smooth_lp_density(field, p)
    return SolveReport(
        body=field,
        multiplier=float(density @ f / (f @ f)),
        volume_residual=trace.steps[-1].gauss_volume - 0.5,
        stationarity_residual=float(np.max(np.abs(density - f))),
        iterations=total_newton,
        homotopy_trace=trace.steps,
        flags=tuple(flags),
        objective_trace=(),
    )
