"""Exception types shared across the package."""


class MimocoordError(Exception):
    """Base class for all package errors."""


class NotHermitian(MimocoordError):
    """Input matrix is not Hermitian within the accepted asymmetry."""


class NotPositiveDefinite(MimocoordError):
    """Cholesky pivot at or below the degeneracy threshold (missing noise floor?)."""


class ConvergenceFailure(MimocoordError):
    """Eigenvalue iteration did not converge."""


class DimensionMismatch(MimocoordError):
    """Array shapes inconsistent with the network configuration."""


class SingularProjection(MimocoordError):
    """Projected I+N matrix is numerically singular (rank-deficient filter)."""


class BelowMinDistance(MimocoordError):
    """Link distance below the deployment minimum."""


class RejectionBudgetExceeded(MimocoordError):
    """User drop resampling exhausted its retry budget."""


class InvalidInput(MimocoordError):
    """Argument outside the documented domain."""


class InfeasibleAllocation(MimocoordError):
    """Power allocation has no feasible stream to carry the budget."""


class ParseError(MimocoordError):
    """Experiment config text could not be parsed."""


class ValidationError(MimocoordError):
    """Experiment config violates an invariant."""
