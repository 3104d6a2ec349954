"""
Definition of the :class:`EvalConfig` and :class:`MatchResult` classes and
the greedy matching that produces the latter.
"""
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from detection_calibration.data.coco import read_json
from detection_calibration.data.config import DEFAULT_CONFIGURATION_FILE
from detection_calibration.data.dataset import Dataset
from detection_calibration.data.geometry import pairwise_iou
from detection_calibration.matching.messages import (
    INVALID_BANDWIDTH,
    INVALID_BINS,
    INVALID_LEGACY_TAU,
    INVALID_PRE_THRESHOLD,
    INVALID_TAU,
    INVALID_TAU_SET,
    INVALID_TOP_K,
    MISMATCHED_MATCHES,
    UNKNOWN_CONFIG_KEYS,
)
from detection_calibration.matching.utils import EPS_MATCH, UNMATCHED
from detection_calibration.utils.exceptions import DatasetValidationError


def validate_tau(tau: float) -> float:
    if not 0 <= tau < 1:
        raise ValueError(INVALID_TAU.format(tau=tau))
    return float(tau)


@dataclass(frozen=True)
class EvalConfig:
    """
    Evaluation settings.

    Parameters
    ----------
    tau : float
        TP-validation IoU threshold of LRP, the proposed measures and
        LRP-optimal thresholding
    bins : int
        Number of bins of LaECE and LaECE0
    top_k : int
        Detections kept per image before evaluation
    legacy_tau : float
        TP-validation IoU threshold of D-ECE, LaECE and AP
    dece_bins : int
        Number of bins of D-ECE
    coco_taus : Tuple[float, ...]
        Thresholds averaged by COCO-style D-ECE
    kernel_bandwidth : float
        Gaussian kernel bandwidth of the kernel calibration error
    dece_pre_threshold : float
        Confidence from which D-ECE-style calibration pairs are built
    """

    tau: float = 0.0
    bins: int = 25
    top_k: int = 100
    legacy_tau: float = 0.5
    dece_bins: int = 10
    coco_taus: Tuple[float, ...] = field(
        default=(0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)
    )
    kernel_bandwidth: float = 0.05
    dece_pre_threshold: float = 0.3

    def __post_init__(self) -> None:
        validate_tau(self.tau)
        if not 0 < self.legacy_tau < 1:
            raise ValueError(INVALID_LEGACY_TAU.format(tau=self.legacy_tau))
        for name in ("bins", "dece_bins"):
            bins = getattr(self, name)
            if int(bins) != bins or bins < 1:
                raise ValueError(INVALID_BINS.format(name=name, bins=bins))
        if int(self.top_k) != self.top_k or self.top_k < 1:
            raise ValueError(INVALID_TOP_K.format(top_k=self.top_k))
        object.__setattr__(self, "coco_taus", tuple(self.coco_taus))
        if not self.coco_taus or not all(0 < t < 1 for t in self.coco_taus):
            raise ValueError(INVALID_TAU_SET.format(taus=list(self.coco_taus)))
        if not self.kernel_bandwidth > 0:
            raise ValueError(
                INVALID_BANDWIDTH.format(bandwidth=self.kernel_bandwidth)
            )
        if not 0 <= self.dece_pre_threshold <= 1:
            raise ValueError(
                INVALID_PRE_THRESHOLD.format(
                    threshold=self.dece_pre_threshold
                )
            )

    @classmethod
    def from_file(
        cls, path: Union[str, Path] = None, **overrides
    ) -> "EvalConfig":
        """
        Read a configuration file, falling back to the packaged defaults.

        Parameters
        ----------
        path : Union[str, Path], optional
            JSON file with a subset of the configuration keys, by default
            the packaged ``defaults.json``
        **overrides
            Values taking precedence over the file; ``None`` values are
            ignored

        Returns
        -------
        EvalConfig
            The validated configuration
        """
        settings = read_json(DEFAULT_CONFIGURATION_FILE)
        if path is not None:
            user_settings = read_json(path)
            available = [f.name for f in fields(cls)]
            unknown = sorted(set(user_settings) - set(available))
            if unknown:
                raise DatasetValidationError(
                    UNKNOWN_CONFIG_KEYS.format(
                        path=path, keys=unknown, available=available
                    )
                )
            settings.update(user_settings)
        settings.update(
            {
                key: value
                for key, value in overrides.items()
                if value is not None
            }
        )
        return cls(**settings)

    def update(self, **changes) -> "EvalConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        settings = {f.name: getattr(self, f.name) for f in fields(self)}
        settings["coco_taus"] = list(self.coco_taus)
        return settings

    def __str__(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class MatchResult:
    """
    Assignment of detections to ground-truth objects at a given tau.

    Attributes
    ----------
    tau : float
        The TP-validation threshold used
    assignment : np.ndarray
        ``(N,)`` index of the matched ground-truth object per detection, or
        -1 for false positives
    iou : np.ndarray
        ``(N,)`` IoU with the matched object; 0 for false positives
    det_category_ids, det_image_ids : np.ndarray
        ``(N,)`` class and image of every detection
    gt_category_ids : np.ndarray
        ``(M,)`` class of every ground-truth object
    """

    tau: float
    assignment: np.ndarray
    iou: np.ndarray
    det_category_ids: np.ndarray
    det_image_ids: np.ndarray
    gt_category_ids: np.ndarray

    @property
    def is_tp(self) -> np.ndarray:
        return self.assignment != UNMATCHED

    def class_mask(self, category_id: int) -> np.ndarray:
        return self.det_category_ids == category_id

    def image_mask(self, image_id: int) -> np.ndarray:
        return self.det_image_ids == image_id

    def counts(self, category_id: int = None) -> Dict[str, int]:
        """
        TP, FP and FN counts, overall or for a single class.
        """
        if category_id is None:
            tp = self.is_tp
            n_objects = len(self.gt_category_ids)
        else:
            tp = self.is_tp[self.class_mask(category_id)]
            n_objects = int((self.gt_category_ids == category_id).sum())
        n_tp = int(tp.sum())
        return {"tp": n_tp, "fp": len(tp) - n_tp, "fn": n_objects - n_tp}

    def select(self, keep: np.ndarray) -> "MatchResult":
        """
        Restrict the result to the detections flagged by *keep*.

        Valid only when *keep* removes a score-suffix of every image/class
        group (as score thresholds do): greedy assignments of the surviving
        detections are then unchanged.
        """
        keep = np.asarray(keep, dtype=bool)
        return MatchResult(
            self.tau,
            self.assignment[keep],
            self.iou[keep],
            self.det_category_ids[keep],
            self.det_image_ids[keep],
            self.gt_category_ids,
        )

    def check(self, dataset: Dataset) -> None:
        if len(self.assignment) != dataset.num_detections:
            raise ValueError(
                MISMATCHED_MATCHES.format(
                    n_matches=len(self.assignment),
                    n_detections=dataset.num_detections,
                )
            )


def group_positions(keys: np.ndarray) -> Dict[int, np.ndarray]:
    """
    Map every distinct key to the ascending positions where it occurs.
    """
    keys = np.asarray(keys)
    order = np.argsort(keys, kind="stable")
    unique, starts = np.unique(keys[order], return_index=True)
    return dict(zip(unique.tolist(), np.split(order, starts[1:])))


def match(dataset: Dataset, tau: float) -> MatchResult:
    """
    Greedy, class-aware matching of detections to ground truth.

    Detections are visited in canonical order (descending score). Each one
    takes the unmatched same-class object of its image with the highest IoU
    (ties: lowest object index), provided that IoU reaches *tau*; with
    ``tau == 0`` the overlap must reach a small positive floor instead, so
    that zero-overlap detections stay false positives.

    Parameters
    ----------
    dataset : Dataset
        Validated dataset with ground truth and detections
    tau : float
        TP-validation IoU threshold in [0, 1)

    Returns
    -------
    MatchResult
        Per-detection assignment and IoU
    """
    tau = validate_tau(tau)
    threshold = tau if tau > 0 else EPS_MATCH
    assignment = np.full(dataset.num_detections, UNMATCHED, dtype=np.int64)
    ious = np.zeros(dataset.num_detections, dtype=np.float64)

    gt_groups = group_positions(dataset.gt_image_ids)
    for image_id, det_positions in group_positions(
        dataset.det_image_ids
    ).items():
        gt_positions = gt_groups.get(image_id)
        if gt_positions is None:
            continue
        overlaps = pairwise_iou(
            dataset.det_boxes[det_positions], dataset.gt_boxes[gt_positions]
        )
        same_class = (
            dataset.det_category_ids[det_positions][:, None]
            == dataset.gt_category_ids[gt_positions][None, :]
        )
        overlaps = np.where(same_class, overlaps, -1.0)
        taken = np.zeros(len(gt_positions), dtype=bool)
        for row, position in enumerate(det_positions):
            candidates = np.where(taken, -1.0, overlaps[row])
            best = int(np.argmax(candidates))
            if candidates[best] >= threshold:
                taken[best] = True
                assignment[position] = gt_positions[best]
                ious[position] = candidates[best]
                if taken.all():
                    break

    return MatchResult(
        tau,
        assignment,
        ious,
        dataset.det_category_ids,
        dataset.det_image_ids,
        dataset.gt_category_ids,
    )


def match_many(dataset: Dataset, taus: List[float]) -> List[MatchResult]:
    return [match(dataset, tau) for tau in taus]
