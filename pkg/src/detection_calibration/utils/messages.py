#: Errors
MISSING_DATAGRABBER = "Either *data_grabber* or *ground_truth* inputs must be provided to {object_name} object's instantiation."  # noqa: E501
INVALID_STEP = "Sweep step must lie in (0, 1], but {step} was passed."
UNKNOWN_MEASURE = "Unknown binned measure '{measure}'. Available measures are: {available}"  # noqa: E501
AUTO_THRESHOLD_REQUIRES_VAL = "--auto-threshold requires both --val-gt and --val-dets."  # noqa: E501
#: Warnings
MISSING_DETECTIONS = "No detections file was provided to {object_name}; only ground truth is available."  # noqa: E501
