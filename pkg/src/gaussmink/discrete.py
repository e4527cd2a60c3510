"""Constrained variational solver for discrete surface measures.

Given a finite measure mu = sum_i m_i delta_{v_i} on the circle and an
exponent p > 0, minimize

    phi(h) = sum_i m_i h_i^p      subject to  gamma_2([h]) = 1/2,

where [h] is the halfplane intersection with support numbers h on the atom
directions.  A minimizer K satisfies mu = (lambda / p) S_p(K) for some
lambda > 0, i.e. p m_i = lambda S_{p,i} on every atom whose facet survives;
the solver recovers lambda by least squares and reports the worst relative
defect of that relation.

Method: augmented Lagrangian in the single volume constraint (penalty
doubling across at most 12 outer rounds) with a projected-gradient inner
loop (Barzilai-Borwein steps, nonmonotone backtracking, componentwise floor
h >= h_min).  The constraint value is the per-sector exact Gaussian volume
and its gradient is the vector of exact edge masses, so the pair is
derivative-consistent and the inner problems are smooth away from facet
births.  The solve is deterministic: it always starts from the ball
h = r_half of Gaussian volume exactly 1/2.

Precondition: the measure must not concentrate on a closed hemisphere
(otherwise inflating a halfplane-shaped body lowers phi without bound and
no minimizer exists).  When the measure is even with total mass below the
threshold sqrt(2/pi) r^-p a e^{-a^2/2}, the unnormalized problem
S_p(K) = mu has a unique solution on the gamma > 1/2 branch; outside that
regime the solve still runs but the report carries the
"no-uniqueness-certificate" flag, since the theory then guarantees only
some lambda > 0, not the lambda = p normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HemisphereConditionError, SolverStallError
from .gaussian import (
    gauss_constants,
    gauss_surface_polygon,
    gauss_volume_exact,
    lp_gauss_surface_polygon,
)
from .geometry import (
    DiscreteMeasure,
    SupportPolygon,
    check_hemisphere_condition,
    hemisphere_margin,
    wulff_shape_with_indices,
)
from .report import SolveReport

H_MIN = 1e-6  # componentwise floor; guards h^(p-1) singularities for p < 1


@dataclass(frozen=True)
class VariationalProblem:
    """Problem data for the constrained minimization."""

    mu: DiscreteMeasure
    p: float
    target_volume: float = 0.5
    stationarity_tol: float = 1e-4
    volume_tol: float = 1e-8

    def __post_init__(self):
        if self.mu.dimension != 2:
            raise ValueError("the discrete solver handles planar measures only")
        if self.p <= 0.0:
            raise ValueError("exponent p must be positive")
        if not 0.0 < self.target_volume < 1.0:
            raise ValueError("target volume must lie in (0, 1)")
        if self.stationarity_tol <= 0.0 or self.volume_tol <= 0.0:
            raise ValueError("tolerances must be positive")


def phi_objective(h, mu: DiscreteMeasure, p: float) -> float:
    """phi(h) = sum_i mass_i h_i^p over the atom directions."""
    h = np.asarray(h, dtype=float)
    if h.shape != (mu.num_atoms,):
        raise ValueError("one support value per atom required")
    if np.any(h <= 0.0):
        raise ValueError("support values must be positive")
    return float(mu.masses @ h**p)


def volume_gradient(body: SupportPolygon) -> np.ndarray:
    """d gamma_2 / d h_i per edge: exactly the Gaussian edge masses."""
    return gauss_surface_polygon(body).masses


def volume_gradient_for(normals, support) -> np.ndarray:
    """Volume gradient aligned with an unreduced constraint list.

    Entries of normals whose halfplane is redundant at these support numbers
    bound no facet and get gradient zero.
    """
    body, kept = wulff_shape_with_indices(normals, support)
    grad = np.zeros(np.atleast_2d(np.asarray(normals)).shape[0])
    grad[kept] = volume_gradient(body)
    return grad


def recover_multiplier(body: SupportPolygon, mu: DiscreteMeasure,
                       p: float) -> tuple[float, float]:
    """Least-squares lambda for p m_i = lambda S_{p,i} and its worst defect.

    S_{p,i} is the L_p surface mass of the facet normal to atom i (zero when
    the atom bounds no facet).  Returns (lambda, max over active atoms of
    |p m_i - lambda S_{p,i}| / (p m_i)).
    """
    sp = lp_gauss_surface_polygon(body, p)
    body_angles = np.mod(np.arctan2(body.normals[:, 1], body.normals[:, 0]),
                         2.0 * math.pi)
    atom_angles = np.mod(np.arctan2(mu.directions[:, 1], mu.directions[:, 0]),
                         2.0 * math.pi)
    s = np.zeros(mu.num_atoms)
    order = np.argsort(body_angles)
    pos = np.searchsorted(body_angles[order], atom_angles)
    for i, q in enumerate(pos):
        for j in (q - 1, q % len(order)):
            k = order[j]
            gap = abs(atom_angles[i] - body_angles[k])
            if min(gap, 2.0 * math.pi - gap) <= 1e-9:
                s[i] = sp.masses[k]
                break
    if not np.any(s > 0.0):
        raise ValueError("no atom matches a facet with positive mass")
    target = p * mu.masses
    lam = float((target @ s) / (s @ s))
    active = s > 0.0
    residual = float(np.max(np.abs(target[active] - lam * s[active]) / target[active]))
    return lam, residual


def _hemisphere_error(mu: DiscreteMeasure) -> HemisphereConditionError:
    return HemisphereConditionError(
        "measure is concentrated on a closed hemisphere (margin "
        f"{hemisphere_margin(mu):.3g}): translates of a halfplane-like body "
        "lower the objective without bound, so no minimizer exists"
    )


def solve_constrained(prob: VariationalProblem, max_outer: int = 12,
                      max_inner: int = 4000) -> SolveReport:
    """Minimize phi subject to the Gaussian volume constraint.

    Raises HemisphereConditionError / MassBoundError for inputs outside the
    solvable regime and SolverStallError (with the trace collected so far)
    when the line search or the outer loop fails to converge.
    """
    mu, p = prob.mu, prob.p
    if not check_hemisphere_condition(mu, epsilon=1e-8):
        raise _hemisphere_error(mu)
    flags: list[str] = []
    constants = gauss_constants(2, p)
    # Uniqueness of the unnormalized problem S_p(K) = mu on the gamma > 1/2
    # branch is certified only for even measures below the mass threshold;
    # the constrained minimization itself needs no mass restriction.
    if not (mu.is_even() and mu.total_mass < constants.mass_bound):
        flags.append("no-uniqueness-certificate")

    directions = mu.directions
    masses = mu.masses
    k = mu.num_atoms

    def reduced(z):
        return wulff_shape_with_indices(directions, z)

    def constraint(z):
        body, kept = reduced(z)
        grad = np.zeros(k)
        grad[kept] = volume_gradient(body)
        return gauss_volume_exact(body) - prob.target_volume, grad, body

    def lagrangian(z, lam_hat, rho):
        c, cgrad, _ = constraint(z)
        val = float(masses @ z**p) - lam_hat * c + 0.5 * rho * c * c
        grad = p * masses * z ** (p - 1.0) - (lam_hat - rho * c) * cgrad
        return val, grad, c

    z = np.full(k, constants.r_half)
    c0, cgrad0, _ = constraint(z)
    phigrad0 = p * masses * z ** (p - 1.0)
    lam_hat = float((phigrad0 @ cgrad0) / (cgrad0 @ cgrad0))
    rho = 10.0 * max(1.0, abs(lam_hat))

    objective_trace = [phi_objective(z, mu, p)]
    total_inner = 0
    prev_abs_c = math.inf
    best: tuple | None = None

    for outer in range(max_outer):
        inner_tol = max(2e-12, 1e-5 * 0.1**outer)
        z, inner_iters = _projected_bb(
            lambda zz: lagrangian(zz, lam_hat, rho),
            z, inner_tol, max_inner, objective_trace,
        )
        total_inner += inner_iters
        c, _, body = constraint(z)
        lam_hat -= rho * c
        objective_trace.append(phi_objective(z, mu, p))

        lam, stat = recover_multiplier(body, mu, p)
        best = (z.copy(), body, c, lam, stat)
        if abs(c) <= 0.1 * prob.volume_tol and stat <= 0.5 * prob.stationarity_tol:
            break
        if abs(c) > 0.25 * prev_abs_c:
            rho *= 2.0
        prev_abs_c = abs(c)

    z, body, c, lam, stat = best
    if abs(c) > prob.volume_tol or stat > prob.stationarity_tol:
        raise SolverStallError(
            f"no convergence after {max_outer} outer rounds: |volume residual| "
            f"= {abs(c):.3g}, stationarity residual = {stat:.3g}",
            trace=objective_trace,
        )
    if body.num_edges < k:
        flags.append("facet-collapse")
    if lam <= 0.0:
        flags.append("nonpositive-multiplier")
    return SolveReport(
        body=body,
        multiplier=lam,
        volume_residual=c,
        stationarity_residual=stat,
        iterations=total_inner,
        homotopy_trace=(),
        flags=tuple(flags),
        objective_trace=tuple(objective_trace),
    )


def _projected_bb(fun, z, tol, max_iter, trace):
    """Projected gradient descent with Barzilai-Borwein steps.

    fun returns (value, gradient, constraint) of the augmented Lagrangian;
    iterates are kept >= H_MIN componentwise.  Nonmonotone Armijo
    backtracking (5-value memory) accepts steps.  When no halving yields a
    certified decrease the objective has flattened to machine precision, so
    the loop returns its current iterate and leaves the accept or reject
    decision to the caller's residual checks.
    """
    f, g, _ = fun(z)
    memory = [f]
    step = 1.0 / max(np.max(np.abs(g)), 1e-8)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(z - np.maximum(z - g, H_MIN))) <= tol:
            break
        f_ref = max(memory)
        t = step
        z_new = f_new = g_new = None
        for _ in range(40):
            cand = np.maximum(z - t * g, H_MIN)
            d = cand - z
            if not np.any(d):
                t *= 0.5
                continue
            fc, gc, _ = fun(cand)
            if fc <= f_ref + 1e-4 * float(g @ d):
                z_new, f_new, g_new = cand, fc, gc
                break
            t *= 0.5
        if z_new is None:
            break  # objective flat to rounding: no certifiable descent left
        s = z_new - z
        y = g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 1e-300 else min(1.0, 4.0 * t)
        step = float(np.clip(step, 1e-10, 1e8))
        z, f, g = z_new, f_new, g_new
        memory.append(f)
        if len(memory) > 5:
            memory.pop(0)
    return z, it
