"""
Localisation-Recall-Precision (LRP) error and its components.
"""
import math
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from detection_calibration.accuracy.messages import TAU_MISMATCH
from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult


@dataclass(frozen=True)
class LRPResult:
    """
    LRP error with its localisation, FP and FN components.

    ``lrp`` is NaN (and ``defined`` False) when there are no TPs, FPs or
    FNs at all. ``lrp_loc`` is 0 with ``loc_defined`` False when there are
    no TPs.
    """

    lrp: float
    lrp_loc: float
    lrp_fp: float
    lrp_fn: float
    n_tp: int
    n_fp: int
    n_fn: int
    defined: bool
    loc_defined: bool

    @property
    def n_detections(self) -> int:
        return self.n_tp + self.n_fp

    @property
    def n_objects(self) -> int:
        return self.n_tp + self.n_fn

    def reconstruct(self) -> float:
        """
        LRP rebuilt from its weighted components.
        """
        total = self.n_tp + self.n_fp + self.n_fn
        if total == 0:
            return math.nan
        return (
            self.n_tp * self.lrp_loc
            + self.n_detections * self.lrp_fp
            + self.n_objects * self.lrp_fn
        ) / total

    def to_dict(self) -> dict:
        return asdict(self)


def localisation_errors(ious: np.ndarray, tau: float) -> np.ndarray:
    return (1.0 - np.asarray(ious, dtype=np.float64)) / (1.0 - tau)


def lrp_from_counts(
    is_tp: np.ndarray, ious: np.ndarray, n_objects: int, tau: float
) -> LRPResult:
    """
    LRP of a detection set given which detections are TPs.

    Parameters
    ----------
    is_tp : np.ndarray
        ``(N,)`` boolean TP flags
    ious : np.ndarray
        ``(N,)`` IoU with the matched object (ignored for FPs)
    n_objects : int
        Number of ground-truth objects
    tau : float
        TP-validation threshold the matching used

    Returns
    -------
    LRPResult
        The LRP error and its decomposition
    """
    is_tp = np.asarray(is_tp, dtype=bool)
    n_detections = len(is_tp)
    n_tp = int(is_tp.sum())
    n_fp = n_detections - n_tp
    n_fn = int(n_objects) - n_tp
    total = n_tp + n_fp + n_fn
    loc_sum = float(localisation_errors(np.asarray(ious)[is_tp], tau).sum())
    lrp = (n_fp + n_fn + loc_sum) / total if total else math.nan
    return LRPResult(
        lrp=lrp,
        lrp_loc=loc_sum / n_tp if n_tp else 0.0,
        lrp_fp=n_fp / n_detections if n_detections else 0.0,
        lrp_fn=n_fn / n_objects if n_objects else 0.0,
        n_tp=n_tp,
        n_fp=n_fp,
        n_fn=n_fn,
        defined=total > 0,
        loc_defined=n_tp > 0,
    )


def _check_tau(matches: MatchResult, tau: float) -> None:
    if matches.tau != tau:
        raise ValueError(TAU_MISMATCH.format(matches_tau=matches.tau, tau=tau))


def lrp(dataset: Dataset, matches: MatchResult, tau: float) -> LRPResult:
    """
    LRP error of all detections of *dataset* against all of its objects.

    Parameters
    ----------
    dataset : Dataset
        Dataset the matches were computed on
    matches : MatchResult
        Matching at *tau*
    tau : float
        TP-validation threshold

    Returns
    -------
    LRPResult
        The LRP error and its decomposition

    Raises
    ------
    ValueError
        If *matches* was computed at another tau
    """
    _check_tau(matches, tau)
    matches.check(dataset)
    return lrp_from_counts(
        matches.is_tp, matches.iou, dataset.num_objects, tau
    )


def lrp_per_class(
    dataset: Dataset, matches: MatchResult, tau: float
) -> Dict[int, LRPResult]:
    """
    Class-wise LRP for every class with at least one object or detection.
    """
    _check_tau(matches, tau)
    matches.check(dataset)
    result = {}
    for category_id in dataset.category_ids.tolist():
        mask = dataset.det_category_ids == category_id
        n_objects = int((dataset.gt_category_ids == category_id).sum())
        if not n_objects and not mask.any():
            continue
        result[category_id] = lrp_from_counts(
            matches.is_tp[mask], matches.iou[mask], n_objects, tau
        )
    return result


def mean_lrp(per_class: Dict[int, LRPResult]) -> LRPResult:
    """
    Average class-wise LRP results over the classes with ground truth.

    The localisation component is averaged over classes with TPs and the
    FP component over classes with detections; counts are summed.
    """
    with_objects = [r for r in per_class.values() if r.n_objects > 0]
    with_tp = [r for r in with_objects if r.loc_defined]
    with_detections = [r for r in with_objects if r.n_detections > 0]

    def average(results, name):
        if not results:
            return math.nan
        return float(np.mean([getattr(r, name) for r in results]))

    return LRPResult(
        lrp=average(with_objects, "lrp"),
        lrp_loc=average(with_tp, "lrp_loc") if with_tp else 0.0,
        lrp_fp=average(with_detections, "lrp_fp") if with_detections else 0.0,
        lrp_fn=average(with_objects, "lrp_fn"),
        n_tp=sum(r.n_tp for r in with_objects),
        n_fp=sum(r.n_fp for r in with_objects),
        n_fn=sum(r.n_fn for r in with_objects),
        defined=bool(with_objects),
        loc_defined=bool(with_tp),
    )
