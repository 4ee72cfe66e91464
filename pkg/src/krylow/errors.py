"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems exit with 1,
numerical failures with 2.
"""


class KrylowError(Exception):
    """Base class for all library errors."""


class ValidationError(KrylowError, ValueError):
    """Inputs violate a documented precondition."""


class DomainError(ValidationError):
    """A scalar function was evaluated outside its domain."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class BreakdownError(ValidationError):
    """The Krylov space is too small for the requested rank."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ParseError(ValidationError):
    """Malformed input file. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class NumericalError(KrylowError, ArithmeticError):
    """An iterative kernel failed to converge."""


class ResourceError(KrylowError, RuntimeError):
    """The requested dense computation exceeds the configured size cap."""
