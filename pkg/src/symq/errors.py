"""Exception hierarchy shared across the package."""


class SymqError(Exception):
    """Base class for all package errors."""


class ConfigError(SymqError, ValueError):
    """Invalid configuration or argument value."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ShapeError(SymqError, ValueError):
    """Array dimensions do not match what the operation expects."""


class DataError(SymqError, ValueError):
    """Non-finite or otherwise unusable input data."""


class DegenerateSampleError(SymqError, ValueError):
    """A statistic is undefined for the given sample (too small, zero variance)."""


class StateError(SymqError, RuntimeError):
    """Operation not allowed in the object's current state."""


class NumericalError(SymqError, ArithmeticError):
    """Training produced non-finite values."""
