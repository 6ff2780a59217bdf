"""Exception types raised across the package."""


class HermlieError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(HermlieError):
    """Tensor or matrix shapes are inconsistent with the declared dimension."""


class ValidationError(HermlieError):
    """Input data violates a structural precondition (Jacobi, injectivity, ...)."""


class DegenerateParameterError(HermlieError):
    """A constructor parameter collapses the example to a degenerate case."""


class IntegrabilityError(HermlieError):
    """The almost complex structure fails integrability; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class FrameConstructionError(HermlieError):
    """Gram-Schmidt lost rank while building an adapted frame."""


class HypothesisError(HermlieError):
    """An operation's mathematical hypothesis fails for the given input."""


class ParseError(HermlieError):
    """A structure file fails schema validation; message names the location."""
