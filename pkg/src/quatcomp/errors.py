"""Exception types shared across the package."""


class QuatCompError(Exception):
    """Base class for all quatcomp errors."""


class ShapeMismatchError(QuatCompError):
    """Operand shapes are incompatible; message names both shapes."""


class PurityError(QuatCompError):
    """Operation requires a pure quaternion (zero real part)."""


class RepresentationError(QuatCompError):
    """A complex matrix is too far from a valid adjoint representation."""


class NumericalError(QuatCompError):
    """A backing numerical routine failed to converge."""


class DomainError(QuatCompError, ValueError):
    """A scalar argument is outside its admissible domain."""


class IllConditionedError(QuatCompError):
    """A matrix is too ill-conditioned for the requested operation."""


class CapacityError(QuatCompError):
    """More draws requested than the sampling scheme can supply."""


class ConstructibilityError(QuatCompError):
    """Generator parameters admit no valid construction."""


class InfeasibleError(QuatCompError):
    """Observations are inconsistent with the feasible set."""


class InternalConsistencyError(QuatCompError):
    """An internal invariant was violated; indicates a bug."""


class ConvergenceWarning(RuntimeWarning):
    """An iterative routine stopped before reaching its tolerance."""
