"""Exception hierarchy.

Input problems derive from ``ValueError``. Estimation pathologies, where the
data are valid but the estimator has no value, derive from ``EstimationError``.
The CLI maps these two families to exit codes 1 and 2.
"""


class DomainError(ValueError):
    """A parameter or argument lies outside the region where the operation is defined."""


class SampleSizeError(ValueError):
    """Fewer than two items were supplied."""


class InvalidInputError(ValueError):
    """Input that a routine refuses to process (e.g. a flagged estimate)."""


class TruncationError(RuntimeError):
    """A truncated series captured too little probability mass."""


class EstimationError(ArithmeticError):
    """Base class for data sets on which an estimator has no finite value."""

    kind = "estimation_error"


class UndefinedEstimatorError(EstimationError):
    """A mean count in a denominator is zero."""

    kind = "undefined_estimator"


class CovarianceNonPositiveError(EstimationError):
    """The empirical cross-covariance is zero or negative."""

    kind = "covariance_nonpositive"


class NoInteriorMaximumError(EstimationError):
    """The scalar likelihood equation has no root above ``max(rbar1, rbar2)``.

    Attributes:
        bracket: the (low, high) interval scanned before giving up.
    """

    kind = "no_interior_maximum"

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
