#: COCO record keys
IMAGE_KEYS = ["id"]
ANNOTATION_KEYS = ["image_id", "category_id", "bbox"]
CATEGORY_KEYS = ["id", "name"]
DETECTION_KEYS = ["image_id", "category_id", "bbox", "score"]

#: Annotations flagged as crowd regions are dropped at ingestion
CROWD_KEY = "iscrowd"

#: Record descriptions used in validation messages
ANNOTATION_RECORD = "annotation #{index}"
DETECTION_RECORD = "detection #{index}"
IMAGE_RECORD = "image #{index}"
CATEGORY_RECORD = "category #{index}"

#: Default number of detections kept per image
DEFAULT_TOP_K = 100
