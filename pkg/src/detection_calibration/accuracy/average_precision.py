"""
COCO-style 101-point interpolated average precision at a single tau.
"""
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from detection_calibration.accuracy.utils import RECALL_THRESHOLDS
from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult


@dataclass(frozen=True)
class APResult:
    mean: float
    per_class: Dict[int, float] = field(default_factory=dict)


def class_average_precision(is_tp: np.ndarray, n_objects: int) -> float:
    """
    Interpolated AP of one class.

    Parameters
    ----------
    is_tp : np.ndarray
        TP flags of the class's detections in descending score order
    n_objects : int
        Number of ground-truth objects of the class (> 0)

    Returns
    -------
    float
        Mean of the precision envelope sampled on the recall grid
        ``{0, 0.01, ..., 1}``; grid points beyond the reached recall count
        as 0
    """
    is_tp = np.asarray(is_tp, dtype=bool)
    if not len(is_tp):
        return 0.0
    tp = np.cumsum(is_tp, dtype=np.float64)
    fp = np.cumsum(~is_tp, dtype=np.float64)
    recall = tp / n_objects
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    positions = np.searchsorted(recall, RECALL_THRESHOLDS, side="left")
    sampled = np.zeros(len(RECALL_THRESHOLDS))
    reached = positions < len(recall)
    sampled[reached] = envelope[positions[reached]]
    return float(sampled.mean())


def average_precision(dataset: Dataset, matches: MatchResult) -> APResult:
    """
    Per-class and class-averaged AP.

    Parameters
    ----------
    dataset : Dataset
        Dataset (detections capped at top-k per image)
    matches : MatchResult
        Matching at the AP's tau

    Returns
    -------
    APResult
        AP per class with at least one object and their mean (NaN when no
        class has objects)
    """
    matches.check(dataset)
    per_class = {}
    for category_id in dataset.category_ids.tolist():
        n_objects = int((dataset.gt_category_ids == category_id).sum())
        if not n_objects:
            continue
        mask = dataset.det_category_ids == category_id
        per_class[category_id] = class_average_precision(
            matches.is_tp[mask], n_objects
        )
    mean = float(np.mean(list(per_class.values()))) if per_class else math.nan
    return APResult(mean, per_class)
