"""Exception hierarchy shared by the library and the CLI."""


class RoughBDGError(Exception):
    """Base class for all errors raised by roughbdg."""


class InputError(RoughBDGError, ValueError):
    """Malformed input: dimension mismatch, bad grid, parameter out of range."""


class UnsupportedConfigurationError(RoughBDGError):
    """A valid request that this implementation does not support (e.g. CC norm for d != 2)."""


class NumericError(RoughBDGError, ArithmeticError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
