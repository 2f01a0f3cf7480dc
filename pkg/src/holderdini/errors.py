"""Exception and warning types raised across the package."""


class HolderDiniError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HolderDiniError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidSpecError(HolderDiniError, ValueError):
    """A ModulusSpec, GridSpec or other input object violates its construction invariants."""


class NotApplicableError(HolderDiniError):
    """The operation is undefined for the given input (e.g. non-Dini modulus)."""


class ClassificationError(HolderDiniError):
    """A modulus cannot be placed in the class taxonomy."""


class QuadratureError(HolderDiniError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class OrderingError(HolderDiniError, ValueError):
    """Times were given in the wrong order (t <= r)."""


class IllConditionedError(HolderDiniError):
    """An accumulated covariance matrix is numerically singular."""


class BoxTooSmallError(HolderDiniError):
    """The spatial box truncates too much kernel mass."""


class GridMismatchError(HolderDiniError, ValueError):
    """Fields combined in one operation live on different grids."""


class HypothesisError(HolderDiniError, ValueError):
    """Inputs violate a hypothesis required by the estimate being verified."""


class NonContractionError(HolderDiniError):
    """A fixed-point map failed to contract."""


class NonConvergenceError(HolderDiniError):
    """An iteration hit its cap before reaching tolerance."""


class AdmissibilityError(HolderDiniError):
    """A drift is outside the admissible class, or no admissible lambda was found."""


class GradientBoundError(HolderDiniError):
    """A Kolmogorov solution does not satisfy the gradient bound needed for inversion."""


class OutOfDomainError(HolderDiniError):
    """A point left the interpolation box; enlarge the box."""


class BlowUpError(HolderDiniError):
    """A simulated state became non-finite."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(HolderDiniError, ValueError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class TruncationWarning(UserWarning):
    """Kernel mass lost to box truncation exceeds 1e-3."""


class SequenceTooCoarseWarning(UserWarning):
    """Cauchy differences along a mollification sequence are not decreasing."""


class VarianceWarning(UserWarning):
    """Too few Monte Carlo samples for a reliable moment estimate."""
