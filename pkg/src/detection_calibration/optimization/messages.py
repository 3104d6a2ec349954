#: Errors
NON_FINITE_OBJECTIVE = "The objective is not finite at {x} (value {value})."
INVALID_BRACKET = "Golden-section search requires lo < hi, but [{lo}, {hi}] was passed."  # noqa: E501
INVALID_TOLERANCE = "Tolerance must be positive, but {tol} was passed."
MISMATCHED_PAVA_INPUTS = "x, y and w must share a non-zero length, got {lengths}."  # noqa: E501
UNSORTED_PAVA_INPUTS = "x must be strictly ascending; merge duplicate values before isotonic fitting."  # noqa: E501
INVALID_PAVA_WEIGHTS = "Isotonic regression weights must be positive."
