"""
LRP-optimal, class-wise confidence thresholds.
"""
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from tqdm import tqdm

from detection_calibration.accuracy.lrp import localisation_errors
from detection_calibration.accuracy.utils import LRP_TIE_TOLERANCE
from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult, match


@dataclass(frozen=True)
class ThresholdChoice:
    """
    The selected threshold of a class and the LRP (oLRP) it attains.
    """

    threshold: float
    lrp: float


def lrp_curve(
    scores: np.ndarray,
    is_tp: np.ndarray,
    ious: np.ndarray,
    n_objects: int,
    tau: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    LRP of one class at every candidate threshold.

    Candidates are 0 and the distinct detection scores; a threshold keeps
    detections with ``score >= threshold``. Candidates keeping the same
    detections as a smaller one are dropped, so keeping everything is
    represented by 0.

    Parameters
    ----------
    scores : np.ndarray
        Class detection scores in descending order
    is_tp : np.ndarray
        TP flags aligned with *scores*
    ious : np.ndarray
        IoUs aligned with *scores*
    n_objects : int
        Number of objects of the class
    tau : float
        TP-validation threshold of the matching

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        Ascending candidate thresholds and the LRP at each
    """
    scores = np.asarray(scores, dtype=np.float64)
    is_tp = np.asarray(is_tp, dtype=bool)
    distinct = np.unique(scores)
    # 0 already keeps everything the smallest score keeps
    thresholds = np.concatenate([[0.0], distinct[distinct > distinct[0]]])
    if distinct[0] == 0:
        thresholds = distinct
    n_kept = np.searchsorted(-scores, -thresholds, side="right")

    loc = np.where(is_tp, localisation_errors(ious, tau), 0.0)
    cum_tp = np.cumsum(is_tp)[n_kept - 1]
    cum_loc = np.cumsum(loc)[n_kept - 1]
    n_fp = n_kept - cum_tp
    n_fn = n_objects - cum_tp
    lrp = (n_fp + n_fn + cum_loc) / (n_fp + n_fn + cum_tp)
    return thresholds, lrp


def select_threshold(
    thresholds: np.ndarray, lrp: np.ndarray
) -> ThresholdChoice:
    """
    Minimum-LRP candidate; near-ties go to the larger threshold.
    """
    best = np.nanmin(lrp)
    tied = np.flatnonzero(lrp <= best + LRP_TIE_TOLERANCE)
    chosen = tied[-1]
    return ThresholdChoice(float(thresholds[chosen]), float(lrp[chosen]))


def search_thresholds(
    dataset: Dataset,
    tau: float,
    matches: MatchResult = None,
    progress: bool = False,
) -> Dict[int, ThresholdChoice]:
    """
    Class-wise LRP-optimal thresholds with the LRP they attain.

    Matching is computed once: thresholding removes score suffixes, and
    greedy assignments of higher-scoring detections do not depend on
    lower-scoring ones.

    Parameters
    ----------
    dataset : Dataset
        Validation dataset with ground truth and detections
    tau : float
        TP-validation threshold
    matches : MatchResult, optional
        Precomputed matching at *tau*
    progress : bool, optional
        Whether to display a progress bar over classes, by default False

    Returns
    -------
    Dict[int, ThresholdChoice]
        An entry per registry class; classes without detections get
        threshold 0
    """
    if matches is None or matches.tau != tau:
        matches = match(dataset, tau)
    matches.check(dataset)
    choices = {}
    category_ids = dataset.category_ids.tolist()
    for category_id in tqdm(category_ids, disable=not progress):
        mask = dataset.det_category_ids == category_id
        n_objects = int((dataset.gt_category_ids == category_id).sum())
        if not mask.any():
            choices[category_id] = ThresholdChoice(
                0.0, 1.0 if n_objects else math.nan
            )
            continue
        thresholds, lrp = lrp_curve(
            dataset.det_scores[mask],
            matches.is_tp[mask],
            matches.iou[mask],
            n_objects,
            tau,
        )
        choices[category_id] = select_threshold(thresholds, lrp)
    return choices


def lrp_optimal_thresholds(
    dataset: Dataset,
    tau: float,
    matches: MatchResult = None,
    progress: bool = False,
) -> Dict[int, float]:
    """
    Class-wise confidence thresholds minimizing class LRP.

    Parameters
    ----------
    dataset : Dataset
        Validation dataset with ground truth and detections
    tau : float
        TP-validation threshold of the LRP
    matches : MatchResult, optional
        Precomputed matching at *tau*
    progress : bool, optional
        Whether to display a progress bar over classes, by default False

    Returns
    -------
    Dict[int, float]
        Class id to threshold
    """
    return {
        category_id: choice.threshold
        for category_id, choice in search_thresholds(
            dataset, tau, matches, progress
        ).items()
    }


def optimal_lrp(
    dataset: Dataset,
    tau: float,
    matches: MatchResult = None,
    progress: bool = False,
) -> Dict[int, float]:
    """
    Class-wise optimal LRP (oLRP): the LRP each class attains at its
    LRP-optimal threshold. Classes with neither objects nor detections map
    to NaN.
    """
    return {
        category_id: choice.lrp
        for category_id, choice in search_thresholds(
            dataset, tau, matches, progress
        ).items()
    }
