"""Exception hierarchy. The CLI maps these onto exit codes."""


class SpectralCorrError(Exception):
    """Base class for all library errors."""


class ArithmeticOverflowError(SpectralCorrError, OverflowError):
    """An integer left the checked 64-bit range."""


class DomainError(SpectralCorrError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvalidOrderError(DomainError):
    """Discriminant does not describe a quadratic order (square, or not 0/1 mod 4)."""


class ExceptionalTraceError(DomainError):
    """t^2 - 4n is a perfect square; the element does not generate a field.

    For n = p this is the trace p + 1 case, which has its own counting
    machinery (:func:`spectralcorr.embeddings.exceptional_class_count`).
    """

    def __init__(self, t, n):
        super().__init__(f"t^2 - 4n is a square for t={t}, n={n}: exceptional trace")
        self.t = t
        self.n = n


class NumericError(SpectralCorrError, ArithmeticError):
    """A quadrature or series failed to reach its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(SpectralCorrError, RuntimeError):
    """A search exceeded its configured bound."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class BudgetTooSmallError(SpectralCorrError, RuntimeError):
    """Truncation tails exceed what the requested tolerance allows."""


class DataInconsistencyError(SpectralCorrError, ValueError):
    """Input data cannot come from a genuine spectrum."""
