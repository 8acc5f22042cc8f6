"""Exception hierarchy shared by all modules."""


class LinkageError(Exception):
    """Base class for errors raised by linkagebf."""


class DomainError(LinkageError, ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(LinkageError, ArithmeticError):
    """An iterative routine failed to converge.

    The best estimate reached so far is kept on ``estimate`` (and the
    matching absolute error estimate on ``error_estimate``).
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class ImproperPriorError(LinkageError, ValueError):
    """A normalization-dependent computation was asked to use an improper prior."""


class UnsupportedPriorError(LinkageError, ValueError):
    """The requested operation is not defined for this prior family."""


class DegenerateHypothesisError(LinkageError, ValueError):
    """A mixture puts all of its mass on one hypothesis, so no test exists."""


class NoDataError(LinkageError, ValueError):
    """An estimator was called without any observations."""
