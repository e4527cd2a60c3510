"""Result record shared by the discrete and smooth solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import SupportField, SupportPolygon


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a constrained solve.

    multiplier is the Lagrange multiplier lambda in the stationarity
    relation mu = (lambda / p) * (surface area measure of the body);
    volume_residual is gamma_2(body) minus the target; stationarity_residual
    is the worst relative per-atom defect of that relation (discrete path)
    or the final equation residual (smooth path).  homotopy_trace is empty
    for the discrete path; objective_trace records the objective at each
    accepted outer round of the discrete path and is empty for the smooth
    one.  flags carry diagnostics such as "facet-collapse" or
    "no-uniqueness-certificate".
    """

    body: SupportPolygon | SupportField
    multiplier: float
    volume_residual: float
    stationarity_residual: float
    iterations: int
    homotopy_trace: tuple = ()
    flags: tuple = ()
    objective_trace: tuple = ()

    def __post_init__(self):
        for name in ("multiplier", "volume_residual", "stationarity_residual"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.iterations < 0:
            raise ValueError("iteration count must be nonnegative")
        object.__setattr__(self, "homotopy_trace", tuple(self.homotopy_trace))
        object.__setattr__(self, "flags", tuple(self.flags))
        object.__setattr__(self, "objective_trace", tuple(self.objective_trace))
