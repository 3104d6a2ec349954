#: Errors
NO_DETECTIONS = "{measure} is undefined: there are no detections."
TAU_MUST_BE_POSITIVE = "{measure} requires matches computed at tau > 0, but tau={tau} was used."  # noqa: E501
TAU_MUST_BE_ZERO = "{measure} requires matches computed at tau=0, but tau={tau} was used."  # noqa: E501
INVALID_MEASURE_BINS = "{measure} requires a positive integer number of bins, but {bins} was passed."  # noqa: E501
EMPTY_TAU_SET = "COCO-style D-ECE requires a non-empty set of thresholds in (0, 1), but {taus} was passed."  # noqa: E501
INVALID_LINK = "Kernel calibration error link must be one of {available}, but '{link}' was passed."  # noqa: E501
INVALID_KERNEL_BANDWIDTH = "Kernel bandwidth must be positive, but {bandwidth} was passed."  # noqa: E501
NO_KERNEL_CLASSES = "Kernel calibration error requires a class with at least 2 detections."  # noqa: E501
UNKNOWN_REPORT_CLASS = "The {measure} report has no bins for category {category_id}. Available categories are: {available}"  # noqa: E501
#: Warnings
KERNEL_CLASS_SKIPPED = "Category {category_id} has a single detection; it is skipped by the kernel calibration error."  # noqa: E501
