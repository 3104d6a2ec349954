#: Errors
INVALID_BOX = "Bounding box must satisfy x_max >= x_min and y_max >= y_min, but {box} was passed."  # noqa: E501
MALFORMED_JSON = "Could not parse {path} as JSON (line {line}, column {column}): {reason}"  # noqa: E501
MISSING_KEY = "{path}: {record} is missing the required key '{key}'."
MISSING_SECTION = "{path}: the top-level '{key}' section is missing."
NOT_A_LIST = "{path}: expected a JSON array of detections, got {kind}."
DUPLICATE_CATEGORY = "{path}: category id {category_id} is declared more than once."  # noqa: E501
UNKNOWN_CATEGORY = "{path}: {record} references category_id {category_id}, which is not in the category registry."  # noqa: E501
UNKNOWN_IMAGE = "{path}: {record} references image_id {image_id}, which is not in the dataset's images."  # noqa: E501
INVALID_SCORE = "{path}: {record} has score {score}, but scores must lie in [0, 1]."  # noqa: E501
INVALID_RECORD_BOX = "{path}: {record} has an invalid bbox {bbox} (expected [x, y, w, h] with w, h >= 0)."  # noqa: E501
INVALID_RECORD_ID = "{path}: {record} has {key} {value!r}, but ids must be integers."  # noqa: E501
INVALID_TOP_K = "top_k must be a positive integer, but {k} was passed."
INVALID_FRACTION = "Split fraction must lie strictly between 0 and 1, but {fraction} was passed."  # noqa: E501
TOO_FEW_IMAGES = "Splitting requires at least 2 images, but the dataset has {n_images}."  # noqa: E501
MISMATCHED_LENGTH = "Detection arrays must share a length, got {lengths}."
DANGLING_IMAGES = "{kind} reference image ids absent from the dataset: {image_ids}."  # noqa: E501
DANGLING_CATEGORIES = "{kind} reference category ids absent from the registry: {category_ids}."  # noqa: E501
SCORES_OUT_OF_RANGE = "Detection scores must lie in [0, 1]; found values in [{low}, {high}]."  # noqa: E501
