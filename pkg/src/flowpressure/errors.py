"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violates an operation's contract (dimension or grid mismatch)."""


class DomainEscapeError(RuntimeError):
    """An orbit left a euclidean-box domain."""

    def __init__(self, escape_time: float):
        super().__init__(f"orbit escaped the domain at t={escape_time:.6g}")
        self.escape_time = escape_time


class SingularOrbitError(RuntimeError):
    """A rescaled-ball oracle hit a zero-speed sample on the center orbit."""


class InfeasibleCoverError(RuntimeError):
    """The candidate pool cannot reach the required coverage mass."""

    def __init__(self, required: float, achieved: float):
        super().__init__(
            f"cover infeasible: required mass > {required:.6g}, "
            f"pool reaches {achieved:.6g}"
        )
        self.required = required
        self.achieved = achieved


class DegenerateMeasureError(RuntimeError):
    """An empirical measure ended up with no atoms."""


class EstimationFailureError(RuntimeError):
    """All probes were excluded from an estimate."""


class EmptyCompactError(ValueError):
    """No points survive the singular-distance filter when building K."""
