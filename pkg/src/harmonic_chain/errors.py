"""Exception hierarchy shared by all modules."""


class ChainError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ChainError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionError(ChainError, ValueError):
    """Array or window sizes are incompatible."""


class ConfigError(ChainError, ValueError):
    """A simulation or scenario configuration is invalid."""


class EvaluationError(ChainError, ArithmeticError):
    """A user-supplied function returned a non-finite value."""


class NumericalError(ChainError, ArithmeticError):
    """A factorization or internal numerical step failed."""


class AccuracyError(ChainError, ArithmeticError):
    """An adaptive computation failed to reach the requested tolerance.

    The last two iterates (or a partial value and its error estimate) are
    kept on the exception so callers can still inspect them.
    """

    def __init__(self, message, previous=None, current=None):
        super().__init__(message)
        self.previous = previous
        self.current = current
