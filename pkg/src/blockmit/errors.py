"""Exception hierarchy shared across the package."""


class BlockmitError(Exception):
    """Base class for all package errors."""


class ValidationError(BlockmitError, ValueError):
    """Invalid configuration, argument, or circuit (CLI exit code 1)."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class NumericalError(BlockmitError, ArithmeticError):
    """Numerical drift or an unreliable result (CLI exit code 2)."""


class FitError(NumericalError):
    """A fit could not be performed on the supplied points."""
