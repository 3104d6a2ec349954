"""
Axis-aligned bounding boxes and intersection-over-union.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detection_calibration.data.messages import INVALID_BOX


@dataclass(frozen=True)
class BBox:
    """
    A box in corner format, in pixels.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_max >= self.x_min and self.y_max >= self.y_min):
            raise ValueError(INVALID_BOX.format(box=self.as_list()))

    @classmethod
    def from_xywh(cls, bbox: Sequence[float]) -> "BBox":
        """
        Build a box from COCO's ``[x, y, w, h]`` format.

        Parameters
        ----------
        bbox : Sequence[float]
            ``[x, y, width, height]``

        Returns
        -------
        BBox
            The same box in corner format
        """
        x, y, w, h = (float(value) for value in bbox)
        return cls(x, y, x + w, y + h)

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_list(self) -> list:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    def to_xywh(self) -> list:
        return [
            self.x_min,
            self.y_min,
            self.x_max - self.x_min,
            self.y_max - self.y_min,
        ]


def iou(a: BBox, b: BBox) -> float:
    """
    Intersection-over-union of two boxes.

    Parameters
    ----------
    a : BBox
        First box
    b : BBox
        Second box

    Returns
    -------
    float
        ``|a ∩ b| / |a ∪ b|``, or 0 when the union is empty

    Examples
    --------
    >>> iou(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3)) == 1 / 7
    True
    """
    width = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    height = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    intersection = max(width, 0.0) * max(height, 0.0)
    union = a.area + b.area - intersection
    if union <= 0:
        return 0.0
    return intersection / union


def xywh_to_xyxy(boxes: np.ndarray) -> np.ndarray:
    """
    Convert an ``(N, 4)`` array of COCO boxes to corner format.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    converted = boxes.copy()
    converted[:, 2:] = boxes[:, :2] + boxes[:, 2:]
    return converted


def xyxy_to_xywh(boxes: np.ndarray) -> np.ndarray:
    """
    Convert an ``(N, 4)`` array of corner boxes to COCO's format.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    converted = boxes.copy()
    converted[:, 2:] = boxes[:, 2:] - boxes[:, :2]
    return converted


def pairwise_iou(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """
    Vectorized IoU between every box of *boxes_a* and every box of *boxes_b*.

    Parameters
    ----------
    boxes_a : np.ndarray
        ``(N, 4)`` corner boxes
    boxes_b : np.ndarray
        ``(M, 4)`` corner boxes

    Returns
    -------
    np.ndarray
        ``(N, M)`` IoU matrix; pairs with an empty union get 0
    """
    boxes_a = np.asarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    boxes_b = np.asarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    area_a = (boxes_a[:, 2] - boxes_a[:, 0]) * (boxes_a[:, 3] - boxes_a[:, 1])
    area_b = (boxes_b[:, 2] - boxes_b[:, 0]) * (boxes_b[:, 3] - boxes_b[:, 1])
    width = np.minimum(boxes_a[:, None, 2], boxes_b[None, :, 2]) - np.maximum(
        boxes_a[:, None, 0], boxes_b[None, :, 0]
    )
    height = np.minimum(boxes_a[:, None, 3], boxes_b[None, :, 3]) - np.maximum(
        boxes_a[:, None, 1], boxes_b[None, :, 1]
    )
    intersection = np.clip(width, 0, None) * np.clip(height, 0, None)
    union = area_a[:, None] + area_b[None, :] - intersection
    result = np.zeros_like(union)
    np.divide(intersection, union, out=result, where=union > 0)
    return result
