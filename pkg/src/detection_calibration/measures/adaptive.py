"""
Localisation-aware adaptive calibration error (LaACE0).
"""
import numpy as np

from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult
from detection_calibration.measures.binned import (
    CalibrationReport,
    check_inputs,
)
from detection_calibration.measures.utils import LA_ACE0


def la_ace0(dataset: Dataset, matches: MatchResult) -> CalibrationReport:
    """
    Mean absolute gap between confidence and IoU (0 for FPs), averaged
    within each class and then over the classes with detections.

    This is the limit of LaECE0 as bins shrink to one detection each, and
    bounds it from above.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    matches : MatchResult
        Matching at tau = 0

    Returns
    -------
    CalibrationReport
        Overall and class-wise LaACE0 (no bins)
    """
    check_inputs(dataset, matches, LA_ACE0, zero_tau=True)
    gaps = np.abs(dataset.det_scores - np.where(matches.is_tp, matches.iou, 0))
    per_class = {}
    for category_id in dataset.category_ids.tolist():
        mask = dataset.det_category_ids == category_id
        if mask.any():
            per_class[category_id] = float(gaps[mask].mean())
    return CalibrationReport(
        LA_ACE0,
        float(np.mean(list(per_class.values()))),
        per_class,
        tau=matches.tau,
    )
