"""Exception types shared across the package."""


class RealMomentsError(Exception):
    """Base class for all package errors."""


class DimError(RealMomentsError, ValueError):
    """Matrix or subsystem dimensions are inconsistent."""


class ParseError(RealMomentsError, ValueError):
    """A state document could not be parsed."""


class ValidationError(RealMomentsError, ValueError):
    """A matrix violates a required invariant (Hermitian, unit trace, PSD, finite)."""


class ConvergenceError(RealMomentsError, ArithmeticError):
    """An iterative eigensolver exhausted its sweep budget."""
