#: Errors
INVALID_TAU = "tau must lie in [0, 1), but {tau} was passed."
INVALID_LEGACY_TAU = "legacy_tau must lie in (0, 1), but {tau} was passed."
INVALID_BINS = "{name} must be a positive integer, but {bins} was passed."
INVALID_TOP_K = "top_k must be a positive integer, but {top_k} was passed."
INVALID_TAU_SET = "coco_taus must be a non-empty list of values in (0, 1), but {taus} was passed."  # noqa: E501
INVALID_BANDWIDTH = "kernel_bandwidth must be positive, but {bandwidth} was passed."  # noqa: E501
INVALID_PRE_THRESHOLD = "dece_pre_threshold must lie in [0, 1], but {threshold} was passed."  # noqa: E501
UNKNOWN_CONFIG_KEYS = "{path}: unknown configuration keys {keys}. Available keys are: {available}"  # noqa: E501
MISMATCHED_MATCHES = "The match result covers {n_matches} detections, but the dataset holds {n_detections}."  # noqa: E501
