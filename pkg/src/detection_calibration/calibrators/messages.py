#: Errors
INVALID_PAIR = "Calibration pairs must have confidence and target in [0, 1], but ({confidence}, {target}) was passed."  # noqa: E501
MISMATCHED_PAIRS = "Confidences and targets must share a length, got {n_confidences} and {n_targets}."  # noqa: E501
INVALID_TEMPERATURE = "Temperature must be positive, but {temperature} was passed."  # noqa: E501
INVALID_PLATT_SLOPE = "Platt scaling slope must be nonnegative, but a={a} was passed."  # noqa: E501
INVALID_KNOTS = "Isotonic knots must have strictly ascending x and nondecreasing y in [0, 1]."  # noqa: E501
UNKNOWN_MODEL_KIND = "Unknown calibrator model kind '{kind}'. Available kinds are: {available}"  # noqa: E501
UNKNOWN_CALIBRATOR = "Unknown calibrator '{kind}'. Available calibrators are: {available}"  # noqa: E501
UNKNOWN_OBJECTIVE = "Unknown calibration objective '{name}'. Available objectives are: {available}"  # noqa: E501
INVALID_OBJECTIVE_TAU = "The {name} objective requires {requirement}, but tau={tau} was passed."  # noqa: E501
INVALID_OBJECTIVE_PRE_THRESHOLD = "The pre-threshold must lie in [0, 1], but {pre_threshold} was passed."  # noqa: E501
NO_VALIDATION_DETECTIONS = "Cannot train a calibration pipeline: the validation set has no detections."  # noqa: E501
INVALID_PIPELINE = "{path}: not a valid calibration pipeline ({reason})."
#: Warnings
FIT_FALLBACK = "{kind} fitting requires at least {minimum} calibration pairs, but {n_pairs} were given; using the identity calibrator."  # noqa: E501
MISSING_PIPELINE_CLASS = "Categories {category_ids} are not covered by the calibration pipeline; using the identity calibrator and zero thresholds."  # noqa: E501
