"""Package-specific exception types.

Plain ``ValueError`` is used throughout for domain/usage errors (bad
parameters, unusable input data); ``OverflowError`` for results outside the
double range.  The types below cover the remaining cases.
"""


class ConditioningError(ArithmeticError):
    """Alternating-sum evaluation would lose essentially all significant digits.

    Raised instead of returning garbage when a binomial alternating sum is
    requested beyond its supported population cap.
    """


class InsufficientDataError(ValueError):
    """Fewer observations than the estimator requires."""


class SingularDesignError(ValueError):
    """Regression design has no variation in the regressor."""


class DegenerateSlopeError(ValueError):
    """Fitted slope is exactly zero; point estimates are undefined."""
