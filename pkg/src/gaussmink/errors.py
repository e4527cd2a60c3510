"""Exception types shared across the toolkit.

Input-validation failures subclass ValueError so they map onto the CLI's
"invalid input" exit code; solver breakdowns carry their trace for
post-mortem inspection and map onto the "non-convergence" exit code.
"""


class UnboundedBodyError(ValueError):
    """Normals lie in a closed halfplane; the halfspace intersection is unbounded."""


class HemisphereConditionError(ValueError):
    """Measure concentrated on a closed hemisphere: the constrained objective
    admits minimizing bodies that escape to infinity, so no minimizer exists."""


class MassBoundError(ValueError):
    """Total measure exceeds the solvability threshold sqrt(2/pi) r^-p a e^(-a^2/2):
    any body of Gaussian volume 1/2 already carries at least that much measure."""


class ConvexityError(ValueError):
    """Discrete convexity surrogate (h'' + h) non-positive at some node."""

    def __init__(self, node: int, value: float):
        self.node = node
        self.value = value
        super().__init__(f"convexity surrogate h''+h = {value:.6g} <= 0 at node {node}")


class NoConstantSolutionError(ValueError):
    """Constant right-hand side exceeds the maximum of r^(2-p) e^(-r^2/2) / 2pi."""


class WrongBranchError(ValueError):
    """The constant solution exists but its ball has Gaussian volume <= 1/2."""


class SolverStallError(RuntimeError):
    """Iteration failed to converge; carries the trace accumulated so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
