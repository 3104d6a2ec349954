"""
Binned calibration errors: D-ECE, LaECE, LaECE0 and COCO-style D-ECE.

Every binned measure compares, bin by bin, the mean confidence of the
detections in the bin with an accuracy target:

* ``d_ece``: precision (class-agnostic)
* ``la_ece``: precision times the mean IoU of the TPs (class-wise)
* ``la_ece0``: mean IoU with FPs counted as 0 (class-wise, tau = 0)

The last two targets coincide algebraically; they differ in the tau of the
matching.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from detection_calibration.data.dataset import Dataset
from detection_calibration.matching.matching import MatchResult, match_many
from detection_calibration.measures.messages import (
    EMPTY_TAU_SET,
    INVALID_MEASURE_BINS,
    NO_DETECTIONS,
    TAU_MUST_BE_POSITIVE,
    TAU_MUST_BE_ZERO,
)
from detection_calibration.measures.utils import (
    COCO_D_ECE,
    D_ECE,
    DEFAULT_DECE_BINS,
    DEFAULT_LAECE_BINS,
    LA_ECE,
    LA_ECE0,
    bin_edges,
    bin_indices,
)


@dataclass(frozen=True)
class BinStats:
    """
    Statistics of one non-empty confidence bin.

    ``precision`` is the TP share of the bin, ``mean_iou`` the mean IoU of
    its TPs (0 without TPs) and ``target`` the value the mean confidence is
    compared against; ``error`` is ``|mean_confidence - target|``.
    """

    bin_index: int
    bin_low: float
    bin_high: float
    count: int
    mean_confidence: float
    precision: float
    mean_iou: float
    target: float
    error: float


@dataclass(frozen=True)
class CalibrationReport:
    """
    Result of a calibration measure.

    Attributes
    ----------
    measure : str
        Name of the measure
    value : float
        The overall error
    per_class : Dict[int, float]
        Error of every class with at least one detection
    bins : Tuple[BinStats, ...]
        Non-empty bins over all detections pooled
    class_bins : Dict[int, Tuple[BinStats, ...]]
        Non-empty bins of every class with at least one detection
    tau : float
        TP-validation threshold the matching used
    n_bins : int
        Number of bins (None for unbinned measures)
    """

    measure: str
    value: float
    per_class: Dict[int, float] = field(default_factory=dict)
    bins: Tuple[BinStats, ...] = ()
    class_bins: Dict[int, Tuple[BinStats, ...]] = field(default_factory=dict)
    tau: float = None
    n_bins: int = None

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "value": self.value,
            "tau": self.tau,
            "bins": self.n_bins,
            "per_class": {
                str(category_id): value
                for category_id, value in self.per_class.items()
            },
        }


def check_inputs(
    dataset: Dataset, matches: MatchResult, measure: str, zero_tau: bool
) -> None:
    """
    Validate that *matches* belongs to *dataset*, that there are detections
    to evaluate and that the matching used the tau *measure* requires.

    Raises
    ------
    ValueError
        If any of the conditions does not hold
    """
    matches.check(dataset)
    if not dataset.num_detections:
        raise ValueError(NO_DETECTIONS.format(measure=measure))
    if zero_tau and matches.tau != 0:
        raise ValueError(
            TAU_MUST_BE_ZERO.format(measure=measure, tau=matches.tau)
        )
    if not zero_tau and not matches.tau > 0:
        raise ValueError(
            TAU_MUST_BE_POSITIVE.format(measure=measure, tau=matches.tau)
        )


def _check_bins(bins: int, measure: str) -> int:
    if int(bins) != bins or bins < 1:
        raise ValueError(
            INVALID_MEASURE_BINS.format(measure=measure, bins=bins)
        )
    return int(bins)


def bin_statistics(
    scores: np.ndarray,
    is_tp: np.ndarray,
    ious: np.ndarray,
    bins: int,
    measure: str,
) -> Tuple[Tuple[BinStats, ...], float]:
    """
    Bin a set of detections and compute the binned calibration error.

    Parameters
    ----------
    scores : np.ndarray
        ``(N,)`` confidences, N > 0
    is_tp : np.ndarray
        ``(N,)`` TP flags
    ious : np.ndarray
        ``(N,)`` IoU with the matched object (0 for FPs)
    bins : int
        Number of equal-width bins
    measure : str
        One of ``d_ece``, ``la_ece`` or ``la_ece0``; selects the target

    Returns
    -------
    Tuple[Tuple[BinStats, ...], float]
        The non-empty bins and the count-weighted mean of their errors
    """
    scores = np.asarray(scores, dtype=np.float64)
    is_tp = np.asarray(is_tp, dtype=bool)
    index = bin_indices(scores, bins)
    count = np.bincount(index, minlength=bins)
    confidence = np.bincount(index, weights=scores, minlength=bins)
    tp = np.bincount(index, weights=is_tp.astype(np.float64), minlength=bins)
    iou = np.bincount(
        index, weights=np.where(is_tp, ious, 0.0), minlength=bins
    )
    target = tp if measure == D_ECE else iou

    # |sum(p) - sum(target)| / N equals the count-weighted gap of the means
    value = float(np.abs(confidence - target).sum() / len(scores))

    edges = bin_edges(bins)
    stats = []
    for j in np.flatnonzero(count).tolist():
        mean_confidence = confidence[j] / count[j]
        bin_target = target[j] / count[j]
        stats.append(
            BinStats(
                bin_index=j,
                bin_low=float(edges[j]),
                bin_high=float(edges[j + 1]),
                count=int(count[j]),
                mean_confidence=float(mean_confidence),
                precision=float(tp[j] / count[j]),
                mean_iou=float(iou[j] / tp[j]) if tp[j] else 0.0,
                target=float(bin_target),
                error=float(abs(mean_confidence - bin_target)),
            )
        )
    return tuple(stats), value


def _class_wise(
    dataset: Dataset, matches: MatchResult, bins: int, measure: str
) -> Tuple[Dict[int, float], Dict[int, Tuple[BinStats, ...]]]:
    per_class, class_bins = {}, {}
    for category_id in dataset.category_ids.tolist():
        mask = dataset.det_category_ids == category_id
        if not mask.any():
            continue
        class_bins[category_id], per_class[category_id] = bin_statistics(
            dataset.det_scores[mask],
            matches.is_tp[mask],
            matches.iou[mask],
            bins,
            measure,
        )
    return per_class, class_bins


def _class_mean(per_class: Dict[int, float]) -> float:
    return float(np.mean(list(per_class.values())))


def d_ece(
    dataset: Dataset, matches: MatchResult, bins: int = DEFAULT_DECE_BINS
) -> CalibrationReport:
    """
    Detection expected calibration error.

    Class-agnostic: all detections are binned together and the mean
    confidence of each bin is compared with its precision.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    matches : MatchResult
        Matching at tau > 0
    bins : int, optional
        Number of bins, by default 10

    Returns
    -------
    CalibrationReport
        The overall D-ECE; ``per_class`` holds the D-ECE of each class's
        detections alone
    """
    check_inputs(dataset, matches, D_ECE, zero_tau=False)
    bins = _check_bins(bins, D_ECE)
    pooled, value = bin_statistics(
        dataset.det_scores, matches.is_tp, matches.iou, bins, D_ECE
    )
    per_class, class_bins = _class_wise(dataset, matches, bins, D_ECE)
    return CalibrationReport(
        D_ECE, value, per_class, pooled, class_bins, matches.tau, bins
    )


def _localisation_aware(
    dataset: Dataset, matches: MatchResult, bins: int, measure: str
) -> CalibrationReport:
    bins = _check_bins(bins, measure)
    per_class, class_bins = _class_wise(dataset, matches, bins, measure)
    pooled, _ = bin_statistics(
        dataset.det_scores, matches.is_tp, matches.iou, bins, measure
    )
    return CalibrationReport(
        measure,
        _class_mean(per_class),
        per_class,
        pooled,
        class_bins,
        matches.tau,
        bins,
    )


def la_ece(
    dataset: Dataset, matches: MatchResult, bins: int = DEFAULT_LAECE_BINS
) -> CalibrationReport:
    """
    Localisation-aware ECE at tau > 0.

    For each class with detections, the count-weighted gap between the
    mean confidence of a bin and the product of its precision and the
    mean IoU of its TPs; averaged over classes.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    matches : MatchResult
        Matching at tau > 0
    bins : int, optional
        Number of bins, by default 25

    Returns
    -------
    CalibrationReport
        Overall and class-wise LaECE
    """
    check_inputs(dataset, matches, LA_ECE, zero_tau=False)
    return _localisation_aware(dataset, matches, bins, LA_ECE)


def la_ece0(
    dataset: Dataset, matches: MatchResult, bins: int = DEFAULT_LAECE_BINS
) -> CalibrationReport:
    """
    Localisation-aware ECE at tau = 0.

    The target of a bin is the mean IoU of its detections, with FPs
    contributing 0; classes without detections are ignored.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    matches : MatchResult
        Matching at tau = 0
    bins : int, optional
        Number of bins, by default 25

    Returns
    -------
    CalibrationReport
        Overall and class-wise LaECE0
    """
    check_inputs(dataset, matches, LA_ECE0, zero_tau=True)
    return _localisation_aware(dataset, matches, bins, LA_ECE0)


def coco_style_d_ece(
    dataset: Dataset,
    taus: Sequence[float],
    bins: int = DEFAULT_DECE_BINS,
    matches: List[MatchResult] = None,
) -> CalibrationReport:
    """
    D-ECE averaged over a set of TP-validation thresholds.

    A detection whose IoU lies between two thresholds counts as a TP for
    some of them and as an FP for others, so its contribution to the
    average may not depend on its confidence at all.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    taus : Sequence[float]
        Non-empty set of thresholds in (0, 1)
    bins : int, optional
        Number of bins, by default 10
    matches : List[MatchResult], optional
        Precomputed matchings, one per entry of *taus*

    Returns
    -------
    CalibrationReport
        Mean D-ECE (overall and per class) over *taus*
    """
    taus = [float(tau) for tau in taus]
    if not taus or not all(0 < tau < 1 for tau in taus):
        raise ValueError(EMPTY_TAU_SET.format(taus=taus))
    if not dataset.num_detections:
        raise ValueError(NO_DETECTIONS.format(measure=COCO_D_ECE))
    if matches is None:
        matches = match_many(dataset, taus)
    reports = [d_ece(dataset, result, bins) for result in matches]
    per_class = {
        category_id: float(
            np.mean([report.per_class[category_id] for report in reports])
        )
        for category_id in reports[0].per_class
    }
    return CalibrationReport(
        COCO_D_ECE,
        float(np.mean([report.value for report in reports])),
        per_class,
        n_bins=bins,
    )
