"""Exception hierarchy for the mpeinvert package."""


class MPEError(Exception):
    """Base class for all package errors."""


class DomainError(MPEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularKernelError(MPEError):
    """The kernel is evaluated exactly at an integrable singularity.

    Distinct from DomainError: the point is inside the domain but the
    kernel value is infinite there (1D weighting factor at I = I0).
    """


class RestrictionError(MPEError, ValueError):
    """A geometry/order combination violates the admissibility rules."""

    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class AccuracyError(MPEError, RuntimeError):
    """A numerical routine failed to reach its requested tolerance.

    ``achieved`` carries the best available error estimate.  For grid
    operations ``partial`` holds results for the points that converged and
    ``failed_indices`` flags those that did not.
    """

    def __init__(self, message, achieved=None, partial=None, failed_indices=()):
        super().__init__(message)
        self.achieved = achieved
        self.partial = partial
        self.failed_indices = tuple(failed_indices)


class UnderdeterminedError(MPEError, ValueError):
    """More series coefficients were requested than the data can support."""


class CurveParseError(MPEError, ValueError):
    """A curve file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class CurveValidationError(MPEError, ValueError):
    """Parsed curve data violates the curve invariants."""
