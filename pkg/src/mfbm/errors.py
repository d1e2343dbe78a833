"""Exception hierarchy shared by the library and the CLI."""


class MfbmError(Exception):
    """Base class for all errors raised by :mod:`mfbm`."""


class ParameterError(MfbmError, ValueError):
    """An argument violates a documented precondition."""


class PoleError(ParameterError):
    """A gamma-type function was evaluated at one of its poles."""


class ConvergenceError(MfbmError, ArithmeticError):
    """An iterative or series evaluation failed to reach its tolerance.

    ``estimate`` carries the best achieved error estimate when one exists.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class QuadratureError(ConvergenceError):
    """A quadrature rule did not meet its tolerance."""


class OutsideBallError(ParameterError):
    """A query point lies outside the closed ball of radius R."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InsufficientSamplesError(ParameterError):
    """Too few replicates for a standard-error estimate."""
