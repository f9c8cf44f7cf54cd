"""Exception types shared across the package."""


class VsepError(Exception):
    """Base class for all errors raised by vsep."""


class GraphFormatError(VsepError, ValueError):
    """Malformed or invalid graph input.

    ``line`` is the 1-based input line that triggered the error, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PreconditionError(VsepError, ValueError):
    """An operation was called on input outside its domain."""


class InfeasibleCertificateError(VsepError, ValueError):
    """A certificate failed verification where a feasible one was required."""


class ConvergenceError(VsepError, RuntimeError):
    """An iterative method stopped before meeting its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
