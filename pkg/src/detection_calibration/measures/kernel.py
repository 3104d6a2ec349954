"""
Kernel calibration error: a bin-free calibration error in which a Gaussian
kernel over confidences replaces the bins.
"""
import warnings
from typing import Dict

import numpy as np

from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult
from detection_calibration.measures.messages import (
    INVALID_KERNEL_BANDWIDTH,
    INVALID_LINK,
    KERNEL_CLASS_SKIPPED,
    NO_DETECTIONS,
    NO_KERNEL_CLASSES,
)
from detection_calibration.measures.utils import (
    DEFAULT_KERNEL_BANDWIDTH,
    KERNEL_CE,
    KERNEL_LINKS,
)


def leave_one_out_estimates(
    scores: np.ndarray, link: np.ndarray, bandwidth: float
) -> np.ndarray:
    """
    Kernel-weighted mean of *link* over all other detections, for each
    detection.

    Parameters
    ----------
    scores : np.ndarray
        ``(n,)`` confidences, n >= 2
    link : np.ndarray
        ``(n,)`` accuracy values (IoU or TP indicator)
    bandwidth : float
        Standard deviation of the Gaussian kernel

    Returns
    -------
    np.ndarray
        ``(n,)`` leave-one-out estimates
    """
    scores = np.asarray(scores, dtype=np.float64)
    log_kernel = -((scores[:, None] - scores[None, :]) ** 2) / (
        2.0 * bandwidth**2
    )
    np.fill_diagonal(log_kernel, -np.inf)
    # shifting each row by its maximum keeps the weights from underflowing
    log_kernel -= log_kernel.max(axis=1, keepdims=True)
    weights = np.exp(log_kernel)
    return weights @ np.asarray(link, dtype=np.float64) / weights.sum(axis=1)


def kernel_ce_per_class(
    dataset: Dataset,
    matches: MatchResult,
    link: str = "iou",
    bandwidth: float = DEFAULT_KERNEL_BANDWIDTH,
) -> Dict[int, float]:
    """
    Class-wise kernel calibration error.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    matches : MatchResult
        Matching of *dataset*
    link : str, optional
        ``"iou"`` to compare confidences with IoUs (0 for FPs) or ``"tp"``
        to compare them with TP indicators, by default "iou"
    bandwidth : float, optional
        Kernel bandwidth in confidence space, by default 0.05

    Returns
    -------
    Dict[int, float]
        Error of every class with at least 2 detections; classes with a
        single detection are skipped with a warning
    """
    if link not in KERNEL_LINKS:
        raise ValueError(
            INVALID_LINK.format(available=KERNEL_LINKS, link=link)
        )
    if not bandwidth > 0:
        raise ValueError(INVALID_KERNEL_BANDWIDTH.format(bandwidth=bandwidth))
    matches.check(dataset)
    if not dataset.num_detections:
        raise ValueError(NO_DETECTIONS.format(measure=KERNEL_CE))
    if link == "iou":
        values = np.where(matches.is_tp, matches.iou, 0.0)
    else:
        values = matches.is_tp.astype(np.float64)

    per_class = {}
    for category_id in dataset.category_ids.tolist():
        mask = dataset.det_category_ids == category_id
        n_detections = int(mask.sum())
        if n_detections == 1:
            warnings.warn(KERNEL_CLASS_SKIPPED.format(category_id=category_id))
        if n_detections < 2:
            continue
        scores = dataset.det_scores[mask]
        estimates = leave_one_out_estimates(scores, values[mask], bandwidth)
        per_class[category_id] = float(np.abs(scores - estimates).mean())
    return per_class


def kernel_ce(
    dataset: Dataset,
    matches: MatchResult,
    link: str = "iou",
    bandwidth: float = DEFAULT_KERNEL_BANDWIDTH,
) -> float:
    """
    Kernel calibration error averaged over classes with at least 2
    detections.

    See Also
    --------
    kernel_ce_per_class
    """
    per_class = kernel_ce_per_class(dataset, matches, link, bandwidth)
    if not per_class:
        raise ValueError(NO_KERNEL_CLASSES)
    return float(np.mean(list(per_class.values())))
