"""
Definition of the :class:`Dataset` class and the operations that derive new
datasets from existing ones.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from detection_calibration.data.geometry import BBox
from detection_calibration.data.messages import (
    DANGLING_CATEGORIES,
    DANGLING_IMAGES,
    INVALID_FRACTION,
    INVALID_TOP_K,
    MISMATCHED_LENGTH,
    SCORES_OUT_OF_RANGE,
    TOO_FEW_IMAGES,
)
from detection_calibration.utils.exceptions import DatasetValidationError


@dataclass(frozen=True)
class Category:
    id: int
    name: str


@dataclass(frozen=True)
class GroundTruthObject:
    image_id: int
    category_id: int
    box: BBox


@dataclass(frozen=True)
class Detection:
    image_id: int
    category_id: int
    box: BBox
    score: float


def _frozen(array: np.ndarray, dtype, shape: tuple = None) -> np.ndarray:
    array = np.array(array, dtype=dtype)
    if shape is not None:
        array = array.reshape(shape)
    array.setflags(write=False)
    return array


class Dataset:
    """
    Ground truth and detections of a set of images, stored column-wise.

    Detections are kept in canonical order: descending score, ties resolved
    by the order in which they were given. All operations return new
    datasets; the arrays exposed here are read-only.

    Parameters
    ----------
    categories : Sequence[Category]
        The category registry
    image_ids : Iterable[int]
        Ids of all images in the dataset
    gt_image_ids, gt_category_ids : np.ndarray, optional
        ``(M,)`` image and category of every ground-truth object
    gt_boxes : np.ndarray, optional
        ``(M, 4)`` ground-truth boxes in corner format
    det_image_ids, det_category_ids : np.ndarray, optional
        ``(N,)`` image and predicted class of every detection
    det_boxes : np.ndarray, optional
        ``(N, 4)`` detection boxes in corner format
    det_scores : np.ndarray, optional
        ``(N,)`` confidences in [0, 1]
    """

    def __init__(
        self,
        categories: Sequence[Category],
        image_ids: Iterable[int],
        gt_image_ids: np.ndarray = None,
        gt_category_ids: np.ndarray = None,
        gt_boxes: np.ndarray = None,
        det_image_ids: np.ndarray = None,
        det_category_ids: np.ndarray = None,
        det_boxes: np.ndarray = None,
        det_scores: np.ndarray = None,
    ) -> None:
        self.categories = tuple(sorted(categories, key=lambda c: c.id))
        self.category_ids = _frozen([c.id for c in self.categories], np.int64)
        self.image_ids = _frozen(np.unique(list(image_ids)), np.int64)

        self.gt_image_ids = _frozen(_or_empty(gt_image_ids), np.int64)
        self.gt_category_ids = _frozen(_or_empty(gt_category_ids), np.int64)
        self.gt_boxes = _frozen(_or_empty(gt_boxes), np.float64, (-1, 4))

        det_scores = np.asarray(_or_empty(det_scores), dtype=np.float64)
        order = np.argsort(-det_scores, kind="stable")
        self.det_scores = _frozen(det_scores[order], np.float64)
        self.det_image_ids = _frozen(
            np.asarray(_or_empty(det_image_ids), dtype=np.int64)[order],
            np.int64,
        )
        self.det_category_ids = _frozen(
            np.asarray(_or_empty(det_category_ids), dtype=np.int64)[order],
            np.int64,
        )
        self.det_boxes = _frozen(
            np.asarray(_or_empty(det_boxes), dtype=np.float64).reshape(-1, 4)[
                order
            ],
            np.float64,
        )
        self._validate()

    def _validate(self) -> None:
        gt_lengths = {
            len(self.gt_image_ids),
            len(self.gt_category_ids),
            len(self.gt_boxes),
        }
        det_lengths = {
            len(self.det_image_ids),
            len(self.det_category_ids),
            len(self.det_boxes),
            len(self.det_scores),
        }
        for lengths in (gt_lengths, det_lengths):
            if len(lengths) > 1:
                raise DatasetValidationError(
                    MISMATCHED_LENGTH.format(lengths=sorted(lengths))
                )
        for kind, image_ids, category_ids in (
            ("Ground truth", self.gt_image_ids, self.gt_category_ids),
            ("Detections", self.det_image_ids, self.det_category_ids),
        ):
            dangling = np.setdiff1d(image_ids, self.image_ids)
            if len(dangling):
                raise DatasetValidationError(
                    DANGLING_IMAGES.format(
                        kind=kind, image_ids=dangling.tolist()
                    )
                )
            dangling = np.setdiff1d(category_ids, self.category_ids)
            if len(dangling):
                raise DatasetValidationError(
                    DANGLING_CATEGORIES.format(
                        kind=kind, category_ids=dangling.tolist()
                    )
                )
        scores = self.det_scores
        if len(scores) and not ((scores >= 0).all() and (scores <= 1).all()):
            raise DatasetValidationError(
                SCORES_OUT_OF_RANGE.format(low=scores.min(), high=scores.max())
            )

    @property
    def num_detections(self) -> int:
        return len(self.det_scores)

    @property
    def num_objects(self) -> int:
        return len(self.gt_image_ids)

    @property
    def ground_truth(self) -> List[GroundTruthObject]:
        return [
            GroundTruthObject(int(image_id), int(category_id), BBox(*box))
            for image_id, category_id, box in zip(
                self.gt_image_ids, self.gt_category_ids, self.gt_boxes.tolist()
            )
        ]

    @property
    def detections(self) -> List[Detection]:
        return [
            Detection(int(image_id), int(category_id), BBox(*box), score)
            for image_id, category_id, box, score in zip(
                self.det_image_ids,
                self.det_category_ids,
                self.det_boxes.tolist(),
                self.det_scores.tolist(),
            )
        ]

    def with_detections(
        self,
        image_ids: np.ndarray,
        category_ids: np.ndarray,
        boxes: np.ndarray,
        scores: np.ndarray,
    ) -> "Dataset":
        """
        Replace the detections of the dataset, keeping its ground truth.
        """
        return Dataset(
            self.categories,
            self.image_ids,
            self.gt_image_ids,
            self.gt_category_ids,
            self.gt_boxes,
            image_ids,
            category_ids,
            boxes,
            scores,
        )

    def with_scores(self, scores: np.ndarray) -> "Dataset":
        """
        Replace every detection's score, re-establishing canonical order.
        Detections with equal new scores keep their current relative order.
        """
        return self.with_detections(
            self.det_image_ids, self.det_category_ids, self.det_boxes, scores
        )

    def filter_detections(self, keep: np.ndarray) -> "Dataset":
        """
        Keep the detections flagged by the boolean mask *keep*; order is
        preserved.
        """
        keep = np.asarray(keep, dtype=bool)
        return self.with_detections(
            self.det_image_ids[keep],
            self.det_category_ids[keep],
            self.det_boxes[keep],
            self.det_scores[keep],
        )

    def subset_images(self, image_ids: Iterable[int]) -> "Dataset":
        """
        Restrict the dataset (ground truth and detections) to *image_ids*.
        """
        image_ids = np.unique(list(image_ids))
        gt_keep = np.isin(self.gt_image_ids, image_ids)
        det_keep = np.isin(self.det_image_ids, image_ids)
        return Dataset(
            self.categories,
            image_ids,
            self.gt_image_ids[gt_keep],
            self.gt_category_ids[gt_keep],
            self.gt_boxes[gt_keep],
            self.det_image_ids[det_keep],
            self.det_category_ids[det_keep],
            self.det_boxes[det_keep],
            self.det_scores[det_keep],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.categories == other.categories and all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in (
                "image_ids",
                "gt_image_ids",
                "gt_category_ids",
                "gt_boxes",
                "det_image_ids",
                "det_category_ids",
                "det_boxes",
                "det_scores",
            )
        )

    def __repr__(self) -> str:
        return (
            f"Dataset(K={len(self.categories)}, "
            f"images={len(self.image_ids)}, M={self.num_objects}, "
            f"detections={self.num_detections})"
        )


def _or_empty(values) -> np.ndarray:
    return np.empty(0) if values is None else values


def top_k_per_image(dataset: Dataset, k: int) -> Dataset:
    """
    Keep, for every image, the *k* highest-scoring detections across all
    classes.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    k : int
        Maximum number of detections per image

    Returns
    -------
    Dataset
        The capped dataset; ties are broken by canonical order
    """
    if int(k) != k or k < 1:
        raise ValueError(INVALID_TOP_K.format(k=k))
    rank = pd.Series(dataset.det_image_ids).groupby(dataset.det_image_ids)
    keep = rank.cumcount().to_numpy() < k
    if keep.all():
        return dataset
    return dataset.filter_detections(keep)


def class_thresholds(
    dataset: Dataset, thresholds: Dict[int, float]
) -> np.ndarray:
    """
    Per-detection threshold looked up from a class-to-threshold mapping
    (0 for classes without an entry).
    """
    lookup = {int(c): float(t) for c, t in (thresholds or {}).items()}
    return np.array(
        [lookup.get(c, 0.0) for c in dataset.det_category_ids.tolist()],
        dtype=np.float64,
    )


def threshold_detections(
    dataset: Dataset, thresholds: Dict[int, float]
) -> Dataset:
    """
    Remove detections scoring below their class threshold.

    Parameters
    ----------
    dataset : Dataset
        Dataset with detections
    thresholds : Dict[int, float]
        Class id to threshold; missing classes use 0

    Returns
    -------
    Dataset
        Detections with ``score >= threshold(class)``, order preserved
    """
    keep = dataset.det_scores >= class_thresholds(dataset, thresholds)
    if keep.all():
        return dataset
    return dataset.filter_detections(keep)


def split(
    dataset: Dataset, fraction: float, seed: int
) -> Tuple[Dataset, Dataset]:
    """
    Randomly partition the images of *dataset* into two datasets.

    Parameters
    ----------
    dataset : Dataset
        The dataset to split
    fraction : float
        Share of images assigned to the first part, in (0, 1)
    seed : int
        Seed of the shuffle

    Returns
    -------
    Tuple[Dataset, Dataset]
        The two parts; ground truth and detections follow their image. The
        first part holds ``floor(n * fraction)`` images, clamped to
        ``[1, n - 1]``.
    """
    if not 0 < fraction < 1:
        raise ValueError(INVALID_FRACTION.format(fraction=fraction))
    n_images = len(dataset.image_ids)
    if n_images < 2:
        raise ValueError(TOO_FEW_IMAGES.format(n_images=n_images))
    n_first = min(max(math.floor(n_images * fraction), 1), n_images - 1)
    shuffled = np.random.default_rng(seed).permutation(dataset.image_ids)
    return (
        dataset.subset_images(shuffled[:n_first]),
        dataset.subset_images(shuffled[n_first:]),
    )
