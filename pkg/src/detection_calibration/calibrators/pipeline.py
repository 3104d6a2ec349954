"""
Definition of the :class:`CalibrationPipeline` class: class-wise
calibration thresholds, calibrators and operating thresholds, trained on a
validation set and applied to new detections.
"""
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
from tqdm import tqdm

from detection_calibration.accuracy.thresholds import lrp_optimal_thresholds
from detection_calibration.calibrators.calibrators import (
    FITTERS,
    CalibratorModel,
    IdentityCalibrator,
    TargetPairs,
)
from detection_calibration.calibrators.messages import (
    INVALID_OBJECTIVE_PRE_THRESHOLD,
    INVALID_OBJECTIVE_TAU,
    INVALID_PIPELINE,
    MISSING_PIPELINE_CLASS,
    NO_VALIDATION_DETECTIONS,
    UNKNOWN_CALIBRATOR,
    UNKNOWN_OBJECTIVE,
)
from detection_calibration.calibrators.utils import (
    CALIBRATOR_KINDS,
    DECE,
    DEFAULT_DECE_PRE_THRESHOLD,
    DEFAULT_DECE_TAU,
    LAECE0,
    OBJECTIVES,
)
from detection_calibration.data.coco import read_json
from detection_calibration.data.dataset import Dataset, class_thresholds
from detection_calibration.matching.matching import MatchResult, match
from detection_calibration.utils.exceptions import DatasetValidationError
from detection_calibration.utils.utils import dumps_json


@dataclass(frozen=True)
class CalibrationObjective:
    """
    The calibration error a pipeline is trained for.

    ``laece0`` trains on IoU targets (FPs as 0) from a tau = 0 matching;
    ``dece`` trains on TP/FP indicators at *tau*, using only detections
    scoring at least *pre_threshold*, with one class-agnostic calibrator.
    """

    name: str = LAECE0
    tau: float = 0.0
    pre_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.name not in OBJECTIVES:
            raise ValueError(
                UNKNOWN_OBJECTIVE.format(name=self.name, available=OBJECTIVES)
            )
        if self.name == LAECE0 and self.tau != 0:
            raise ValueError(
                INVALID_OBJECTIVE_TAU.format(
                    name=self.name, requirement="tau = 0", tau=self.tau
                )
            )
        if self.name == DECE and not 0 < self.tau < 1:
            raise ValueError(
                INVALID_OBJECTIVE_TAU.format(
                    name=self.name, requirement="0 < tau < 1", tau=self.tau
                )
            )
        if not 0 <= self.pre_threshold <= 1:
            raise ValueError(
                INVALID_OBJECTIVE_PRE_THRESHOLD.format(
                    pre_threshold=self.pre_threshold
                )
            )

    @classmethod
    def from_name(
        cls, name: str, tau: float = None, pre_threshold: float = None
    ) -> "CalibrationObjective":
        """
        Objective *name* with its defaults (tau 0.5 and pre-threshold 0.30
        for ``dece``); ``laece0`` ignores *tau* and *pre_threshold*.
        """
        if name == DECE:
            return cls(
                DECE,
                DEFAULT_DECE_TAU if tau is None else float(tau),
                DEFAULT_DECE_PRE_THRESHOLD
                if pre_threshold is None
                else float(pre_threshold),
            )
        return cls(name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tau": self.tau,
            "pre_threshold": self.pre_threshold,
        }


@dataclass(frozen=True)
class ClassCalibration:
    """
    Calibration threshold, calibrator and operating threshold of a class.
    """

    u_thr: float = 0.0
    v_thr: float = 0.0
    model: CalibratorModel = field(default_factory=IdentityCalibrator)


@dataclass(frozen=True)
class CalibrationPipeline:
    """
    Trained class-wise calibration.

    Attributes
    ----------
    objective : CalibrationObjective
        The objective the pipeline was trained for
    calibrator : str
        Calibrator kind (``ts``, ``platt`` or ``ir``)
    classes : Dict[int, ClassCalibration]
        An entry per category of the validation registry
    """

    objective: CalibrationObjective
    calibrator: str
    classes: Dict[int, ClassCalibration]

    def entry(self, category_id: int) -> ClassCalibration:
        return self.classes.get(category_id, ClassCalibration())

    @property
    def u_thresholds(self) -> Dict[int, float]:
        return {c: entry.u_thr for c, entry in self.classes.items()}

    @property
    def v_thresholds(self) -> Dict[int, float]:
        return {c: entry.v_thr for c, entry in self.classes.items()}

    @property
    def models(self) -> Dict[int, CalibratorModel]:
        return {c: entry.model for c, entry in self.classes.items()}

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.to_dict(),
            "calibrator": self.calibrator,
            "classes": [
                {
                    "id": category_id,
                    "u_thr": entry.u_thr,
                    "v_thr": entry.v_thr,
                    "model": entry.model.to_dict(),
                }
                for category_id, entry in sorted(self.classes.items())
            ],
        }

    @classmethod
    def from_dict(
        cls, document: dict, path: Union[str, Path] = "<pipeline>"
    ) -> "CalibrationPipeline":
        """
        Rebuild a pipeline from its :meth:`to_dict` form.

        Raises
        ------
        DatasetValidationError
            If *document* is not a valid pipeline
        """
        try:
            objective = CalibrationObjective(
                document["objective"]["name"],
                float(document["objective"]["tau"]),
                float(document["objective"]["pre_threshold"]),
            )
            calibrator = document["calibrator"]
            if calibrator not in CALIBRATOR_KINDS:
                raise ValueError(
                    UNKNOWN_CALIBRATOR.format(
                        kind=calibrator, available=list(CALIBRATOR_KINDS)
                    )
                )
            classes = {}
            for entry in document["classes"]:
                u_thr, v_thr = float(entry["u_thr"]), float(entry["v_thr"])
                if not (0 <= u_thr <= 1 and 0 <= v_thr <= 1):
                    raise ValueError(f"thresholds ({u_thr}, {v_thr})")
                classes[int(entry["id"])] = ClassCalibration(
                    u_thr, v_thr, CalibratorModel.from_dict(entry["model"])
                )
        except (KeyError, TypeError, ValueError) as error:
            raise DatasetValidationError(
                INVALID_PIPELINE.format(path=path, reason=error)
            ) from error
        return cls(objective, calibrator, classes)

    def dumps(self) -> str:
        return dumps_json(self.to_dict())

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CalibrationPipeline":
        return cls.from_dict(read_json(path), path)

    def __str__(self) -> str:
        return json.dumps(self.to_dict())


def build_target_pairs(
    dataset: Dataset,
    matches: MatchResult,
    objective: CalibrationObjective,
) -> Tuple[TargetPairs, np.ndarray]:
    """
    Confidence-target pairs of the detections of *dataset*.

    Parameters
    ----------
    dataset : Dataset
        Thresholded validation detections
    matches : MatchResult
        Matching of *dataset* at ``objective.tau``
    objective : CalibrationObjective
        Selects IoU targets (``laece0``) or TP/FP targets of the detections
        scoring at least the pre-threshold (``dece``)

    Returns
    -------
    Tuple[TargetPairs, np.ndarray]
        The pairs and the category of each pair
    """
    matches.check(dataset)
    if objective.name == LAECE0:
        keep = np.ones(dataset.num_detections, dtype=bool)
        targets = np.where(matches.is_tp, matches.iou, 0.0)
    else:
        keep = dataset.det_scores >= objective.pre_threshold
        targets = matches.is_tp.astype(np.float64)
    return (
        TargetPairs(dataset.det_scores[keep], targets[keep]),
        dataset.det_category_ids[keep],
    )


def _check_calibrator(calibrator: str) -> str:
    if calibrator not in CALIBRATOR_KINDS:
        raise ValueError(
            UNKNOWN_CALIBRATOR.format(
                kind=calibrator, available=list(CALIBRATOR_KINDS)
            )
        )
    return CALIBRATOR_KINDS[calibrator]


def transform_scores(
    dataset: Dataset, models: Dict[int, CalibratorModel]
) -> Dataset:
    """
    Replace every detection's score by its class calibrator's output
    (identity for classes without a model).
    """
    scores = dataset.det_scores.copy()
    for category_id, model in models.items():
        mask = dataset.det_category_ids == category_id
        if mask.any():
            scores[mask] = model.apply(scores[mask])
    return dataset.with_scores(scores)


def train_pipeline(
    val: Dataset,
    objective: CalibrationObjective = None,
    calibrator: str = "ir",
    class_wise: bool = True,
    use_calibration_threshold: bool = True,
    progress: bool = False,
) -> CalibrationPipeline:
    """
    Train class-wise calibration on a validation set.

    1. Pick the LRP-optimal calibration threshold of every class at the
       objective's tau and drop detections below it.
    2. Build calibration pairs from the surviving detections and fit a
       calibrator per class (one shared calibrator for ``dece`` or when
       *class_wise* is False).
    3. Calibrate the surviving detections and pick the LRP-optimal
       operating threshold of every class on the calibrated scores.

    Parameters
    ----------
    val : Dataset
        Validation set with ground truth and (top-k capped) detections
    objective : CalibrationObjective, optional
        By default ``laece0``
    calibrator : str, optional
        ``ts``, ``platt`` or ``ir``, by default "ir"
    class_wise : bool, optional
        Fit one calibrator per class, by default True
    use_calibration_threshold : bool, optional
        Threshold detections before fitting, by default True; when False
        every calibration threshold is 0
    progress : bool, optional
        Whether to display progress bars, by default False

    Returns
    -------
    CalibrationPipeline
        An entry for every class in the registry; classes without surviving
        detections get the identity
    """
    objective = objective or CalibrationObjective()
    kind = _check_calibrator(calibrator)
    if not val.num_detections:
        raise ValueError(NO_VALIDATION_DETECTIONS)
    fit = FITTERS[kind]
    category_ids = val.category_ids.tolist()

    matches = match(val, objective.tau)
    if use_calibration_threshold:
        u_thresholds = lrp_optimal_thresholds(
            val, objective.tau, matches, progress
        )
    else:
        u_thresholds = {category_id: 0.0 for category_id in category_ids}
    keep = val.det_scores >= class_thresholds(val, u_thresholds)
    thresholded = val.filter_detections(keep)
    pairs, pair_categories = build_target_pairs(
        thresholded, matches.select(keep), objective
    )

    if objective.name == DECE or not class_wise:
        shared = fit(pairs)
        fitted = set(np.unique(pair_categories).tolist())
        models = {
            category_id: (
                shared if category_id in fitted else IdentityCalibrator()
            )
            for category_id in category_ids
        }
    else:
        models = {}
        for category_id in tqdm(category_ids, disable=not progress):
            mask = pair_categories == category_id
            models[category_id] = fit(
                TargetPairs(pairs.confidences[mask], pairs.targets[mask])
            )

    calibrated = transform_scores(thresholded, models)
    v_thresholds = lrp_optimal_thresholds(
        calibrated, objective.tau, progress=progress
    )
    classes = {
        category_id: ClassCalibration(
            float(u_thresholds[category_id]),
            float(v_thresholds[category_id]),
            models[category_id],
        )
        for category_id in category_ids
    }
    return CalibrationPipeline(objective, calibrator, classes)


def apply_pipeline(pipeline: CalibrationPipeline, test: Dataset) -> Dataset:
    """
    Calibrate and threshold new detections.

    Detections scoring below their class's calibration threshold are
    dropped, the rest are recalibrated and those whose calibrated score is
    below the class's operating threshold are dropped. Boxes and classes
    are unchanged; classes missing from *pipeline* use the identity and
    zero thresholds, with a warning.

    Parameters
    ----------
    pipeline : CalibrationPipeline
        A trained pipeline
    test : Dataset
        Detections to calibrate

    Returns
    -------
    Dataset
        The remaining, calibrated detections
    """
    present = np.unique(test.det_category_ids).tolist()
    missing = [c for c in present if c not in pipeline.classes]
    if missing:
        warnings.warn(MISSING_PIPELINE_CLASS.format(category_ids=missing))

    kept = test.filter_detections(
        test.det_scores >= class_thresholds(test, pipeline.u_thresholds)
    )
    calibrated = transform_scores(kept, pipeline.models)
    return calibrated.filter_detections(
        calibrated.det_scores
        >= class_thresholds(calibrated, pipeline.v_thresholds)
    )
