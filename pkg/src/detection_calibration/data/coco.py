"""
Reading and writing COCO annotation and results files.
"""
import json
import math
from pathlib import Path
from typing import List, Union

import numpy as np

from detection_calibration.data.dataset import Category, Dataset
from detection_calibration.data.geometry import xywh_to_xyxy, xyxy_to_xywh
from detection_calibration.data.messages import (
    DUPLICATE_CATEGORY,
    INVALID_RECORD_BOX,
    INVALID_RECORD_ID,
    INVALID_SCORE,
    MALFORMED_JSON,
    MISSING_KEY,
    MISSING_SECTION,
    NOT_A_LIST,
    UNKNOWN_CATEGORY,
    UNKNOWN_IMAGE,
)
from detection_calibration.data.utils import (
    ANNOTATION_KEYS,
    ANNOTATION_RECORD,
    CATEGORY_KEYS,
    CATEGORY_RECORD,
    CROWD_KEY,
    DETECTION_KEYS,
    DETECTION_RECORD,
    IMAGE_KEYS,
    IMAGE_RECORD,
)
from detection_calibration.utils.exceptions import DatasetValidationError


def read_json(path: Union[str, Path]):
    """
    Parse a UTF-8 JSON file, reporting syntax errors with their location.

    Parameters
    ----------
    path : Union[str, Path]
        Path to a JSON file

    Returns
    -------
    object
        The decoded document

    Raises
    ------
    DatasetValidationError
        If the file is not valid JSON
    """
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise DatasetValidationError(
            MALFORMED_JSON.format(
                path=path,
                line=error.lineno,
                column=error.colno,
                reason=error.msg,
            )
        ) from error


def _require(record: dict, keys: List[str], path: Path, description: str):
    if not isinstance(record, dict):
        raise DatasetValidationError(
            MISSING_KEY.format(path=path, record=description, key=keys[0])
        )
    for key in keys:
        if key not in record:
            raise DatasetValidationError(
                MISSING_KEY.format(path=path, record=description, key=key)
            )


def _parse_id(record: dict, key: str, path: Path, description: str) -> int:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        integral = False
    else:
        integral = math.isfinite(value) and float(value).is_integer()
    if not integral:
        raise DatasetValidationError(
            INVALID_RECORD_ID.format(
                path=path, record=description, key=key, value=value
            )
        )
    return int(value)


def _parse_box(bbox, path: Path, description: str) -> List[float]:
    try:
        values = [float(value) for value in bbox]
    except (TypeError, ValueError):
        values = []
    valid = (
        len(values) == 4
        and all(math.isfinite(value) for value in values)
        and values[2] >= 0
        and values[3] >= 0
    )
    if not valid:
        raise DatasetValidationError(
            INVALID_RECORD_BOX.format(path=path, record=description, bbox=bbox)
        )
    return values


def load_ground_truth(path: Union[str, Path]) -> Dataset:
    """
    Load a COCO annotation file into a dataset without detections.

    Boxes are converted from ``[x, y, w, h]`` to corner format and
    annotations flagged ``"iscrowd": 1`` are dropped.

    Parameters
    ----------
    path : Union[str, Path]
        COCO annotation JSON with "images", "annotations" and "categories"

    Returns
    -------
    Dataset
        Categories, images and ground-truth objects

    Raises
    ------
    DatasetValidationError
        On malformed JSON, missing keys, invalid boxes or references to
        unknown categories/images; the message names the offending record
    """
    path = Path(path)
    document = read_json(path)
    if not isinstance(document, dict):
        raise DatasetValidationError(
            MISSING_SECTION.format(path=path, key="images")
        )
    for key in ("images", "annotations", "categories"):
        if key not in document:
            raise DatasetValidationError(
                MISSING_SECTION.format(path=path, key=key)
            )

    categories = {}
    for index, record in enumerate(document["categories"]):
        description = CATEGORY_RECORD.format(index=index)
        _require(record, CATEGORY_KEYS, path, description)
        category_id = _parse_id(record, "id", path, description)
        if category_id in categories:
            raise DatasetValidationError(
                DUPLICATE_CATEGORY.format(path=path, category_id=category_id)
            )
        categories[category_id] = Category(category_id, str(record["name"]))

    image_ids = set()
    for index, record in enumerate(document["images"]):
        description = IMAGE_RECORD.format(index=index)
        _require(record, IMAGE_KEYS, path, description)
        image_ids.add(_parse_id(record, "id", path, description))

    gt_image_ids, gt_category_ids, gt_boxes = [], [], []
    for index, record in enumerate(document["annotations"]):
        description = ANNOTATION_RECORD.format(index=index)
        _require(record, ANNOTATION_KEYS, path, description)
        if record.get(CROWD_KEY, 0) == 1:
            continue
        category_id = _parse_id(record, "category_id", path, description)
        if category_id not in categories:
            raise DatasetValidationError(
                UNKNOWN_CATEGORY.format(
                    path=path, record=description, category_id=category_id
                )
            )
        image_id = _parse_id(record, "image_id", path, description)
        if image_id not in image_ids:
            raise DatasetValidationError(
                UNKNOWN_IMAGE.format(
                    path=path, record=description, image_id=image_id
                )
            )
        gt_image_ids.append(image_id)
        gt_category_ids.append(category_id)
        gt_boxes.append(_parse_box(record["bbox"], path, description))

    return Dataset(
        list(categories.values()),
        image_ids,
        gt_image_ids=gt_image_ids,
        gt_category_ids=gt_category_ids,
        gt_boxes=xywh_to_xyxy(np.array(gt_boxes).reshape(-1, 4)),
    )


def load_detections(path: Union[str, Path], dataset: Dataset) -> Dataset:
    """
    Attach the detections of a COCO results file to *dataset*.

    Parameters
    ----------
    path : Union[str, Path]
        JSON array of ``{image_id, category_id, bbox, score}`` records
    dataset : Dataset
        Dataset (usually from :func:`load_ground_truth`) providing the image
        ids and the category registry

    Returns
    -------
    Dataset
        *dataset* with its detections replaced, in canonical order

    Raises
    ------
    DatasetValidationError
        On malformed JSON, scores outside [0, 1], unknown images or
        categories; the message names the offending entry index
    """
    path = Path(path)
    records = read_json(path)
    if not isinstance(records, list):
        raise DatasetValidationError(
            NOT_A_LIST.format(path=path, kind=type(records).__name__)
        )
    known_images = set(dataset.image_ids.tolist())
    known_categories = set(dataset.category_ids.tolist())
    image_ids, category_ids, boxes, scores = [], [], [], []
    for index, record in enumerate(records):
        description = DETECTION_RECORD.format(index=index)
        _require(record, DETECTION_KEYS, path, description)
        image_id = _parse_id(record, "image_id", path, description)
        if image_id not in known_images:
            raise DatasetValidationError(
                UNKNOWN_IMAGE.format(
                    path=path, record=description, image_id=image_id
                )
            )
        category_id = _parse_id(record, "category_id", path, description)
        if category_id not in known_categories:
            raise DatasetValidationError(
                UNKNOWN_CATEGORY.format(
                    path=path, record=description, category_id=category_id
                )
            )
        try:
            score = float(record["score"])
        except (TypeError, ValueError):
            score = math.nan
        if not 0 <= score <= 1:
            raise DatasetValidationError(
                INVALID_SCORE.format(
                    path=path, record=description, score=record["score"]
                )
            )
        image_ids.append(image_id)
        category_ids.append(category_id)
        boxes.append(_parse_box(record["bbox"], path, description))
        scores.append(score)
    return dataset.with_detections(
        image_ids,
        category_ids,
        xywh_to_xyxy(np.array(boxes).reshape(-1, 4)),
        scores,
    )


def to_coco_ground_truth(dataset: Dataset) -> dict:
    """
    Serialize categories, images and ground truth as a COCO annotation
    document.
    """
    boxes = xyxy_to_xywh(dataset.gt_boxes).tolist()
    return {
        "images": [{"id": int(i)} for i in dataset.image_ids],
        "annotations": [
            {
                "id": index + 1,
                "image_id": int(image_id),
                "category_id": int(category_id),
                "bbox": box,
                "area": box[2] * box[3],
                "iscrowd": 0,
            }
            for index, (image_id, category_id, box) in enumerate(
                zip(dataset.gt_image_ids, dataset.gt_category_ids, boxes)
            )
        ],
        "categories": [
            {"id": c.id, "name": c.name} for c in dataset.categories
        ],
    }


def to_coco_results(dataset: Dataset) -> list:
    """
    Serialize the detections (canonical order) as a COCO results array.
    """
    return [
        {
            "image_id": int(image_id),
            "category_id": int(category_id),
            "bbox": box,
            "score": score,
        }
        for image_id, category_id, box, score in zip(
            dataset.det_image_ids,
            dataset.det_category_ids,
            xyxy_to_xywh(dataset.det_boxes).tolist(),
            dataset.det_scores.tolist(),
        )
    ]
