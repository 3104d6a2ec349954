"""
Definition of the :class:`EvaluationManager` class.
"""
import math
import warnings
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from detection_calibration.accuracy.average_precision import (
    average_precision,
)
from detection_calibration.accuracy.lrp import lrp_per_class, mean_lrp
from detection_calibration.accuracy.thresholds import (
    lrp_optimal_thresholds,
    optimal_lrp,
)
from detection_calibration.calibrators.pipeline import (
    CalibrationObjective,
    CalibrationPipeline,
    apply_pipeline,
    train_pipeline,
)
from detection_calibration.data.dataset import (
    Dataset,
    split,
    threshold_detections,
)
from detection_calibration.matching.matching import (
    EvalConfig,
    MatchResult,
    match,
)
from detection_calibration.measures.adaptive import la_ace0
from detection_calibration.measures.binned import (
    CalibrationReport,
    coco_style_d_ece,
    d_ece,
    la_ece,
    la_ece0,
)
from detection_calibration.measures.kernel import kernel_ce_per_class
from detection_calibration.measures.reliability import (
    reliability_data,
    save_reliability_data,
)
from detection_calibration.measures.utils import (
    COCO_D_ECE,
    D_ECE,
    KERNEL_CE,
    LA_ACE0,
    LA_ECE,
    LA_ECE0,
)
from detection_calibration.utils.data_grabber import DataGrabber
from detection_calibration.utils.messages import (
    INVALID_STEP,
    MISSING_DETECTIONS,
    UNKNOWN_MEASURE,
)
from detection_calibration.utils.utils import validate_instantiation


class EvaluationManager:
    """
    Joint accuracy and calibration evaluation of a detection set.

    Parameters
    ----------
    ground_truth : Union[str, Path], optional
        COCO annotation file, by default None
    detections : Union[str, Path], optional
        COCO results file, by default None
    config : EvalConfig, optional
        Evaluation settings, by default the packaged defaults
    data_grabber : DataGrabber, optional
        An existing DataGrabber to use instead of the files
    """

    #: Calibration measures of :meth:`evaluate`
    MEASURES = (D_ECE, LA_ECE, LA_ECE0, LA_ACE0)

    #: Binned measures supporting reliability diagrams
    BINNED_MEASURES = (D_ECE, LA_ECE, LA_ECE0)

    #: Columns of the threshold sweep table
    SWEEP_COLUMNS = [
        "threshold",
        D_ECE,
        LA_ECE,
        LA_ECE0,
        LA_ACE0,
        "lrp",
        "ap",
    ]

    def __init__(
        self,
        ground_truth: Union[str, Path] = None,
        detections: Union[str, Path] = None,
        config: EvalConfig = None,
        data_grabber: DataGrabber = None,
    ) -> None:
        self.config = config or EvalConfig.from_file()
        self.data_grabber = validate_instantiation(
            self,
            ground_truth,
            detections,
            data_grabber,
            top_k=self.config.top_k,
        )
        if not self.data_grabber.has_detections:
            warnings.warn(
                MISSING_DETECTIONS.format(object_name=type(self).__name__)
            )

    @property
    def dataset(self) -> Dataset:
        return self.data_grabber.dataset

    def match_all(
        self, dataset: Dataset
    ) -> Tuple[MatchResult, MatchResult, MatchResult]:
        """
        Matchings at the configured tau, at the legacy tau and at tau = 0,
        computed once each.
        """
        at_tau = match(dataset, self.config.tau)
        at_legacy = (
            at_tau
            if self.config.legacy_tau == self.config.tau
            else match(dataset, self.config.legacy_tau)
        )
        at_zero = at_tau if self.config.tau == 0 else match(dataset, 0.0)
        return at_tau, at_legacy, at_zero

    def calibration_reports(
        self,
        dataset: Dataset,
        at_legacy: MatchResult,
        at_zero: MatchResult,
    ) -> Tuple[Dict[str, CalibrationReport], Dict[str, str]]:
        """
        Every calibration measure of *dataset*; measures that are undefined
        (e.g. without detections) are reported with the reason instead.
        """
        config = self.config
        compute = {
            D_ECE: lambda: d_ece(dataset, at_legacy, config.dece_bins),
            LA_ECE: lambda: la_ece(dataset, at_legacy, config.bins),
            LA_ECE0: lambda: la_ece0(dataset, at_zero, config.bins),
            LA_ACE0: lambda: la_ace0(dataset, at_zero),
        }
        reports, reasons = {}, {}
        for measure in self.MEASURES:
            try:
                reports[measure] = compute[measure]()
            except ValueError as error:
                reasons[measure] = str(error)
        return reports, reasons

    def evaluate(
        self,
        dataset: Dataset = None,
        thresholds: Dict[int, float] = None,
        kernel: bool = False,
        coco: bool = False,
    ) -> dict:
        """
        Accuracy and calibration report of *dataset*.

        Parameters
        ----------
        dataset : Dataset, optional
            Dataset to evaluate, by default the loaded one
        thresholds : Dict[int, float], optional
            Class-wise thresholds applied before evaluation, by default
            None
        kernel : bool, optional
            Whether to include the kernel calibration error, by default
            False
        coco : bool, optional
            Whether to include the D-ECE averaged over the configured
            ``coco_taus``, by default False

        Returns
        -------
        dict
            LRP (class mean at *tau*, with components), the class mean of
            the optimal LRP (oLRP), AP at *legacy_tau*,
            D-ECE and LaECE at *legacy_tau*, LaECE0 and LaACE0 at tau = 0,
            per-class values, the reasons of undefined measures and the
            configuration
        """
        dataset = self.dataset if dataset is None else dataset
        if thresholds:
            dataset = threshold_detections(dataset, thresholds)
        at_tau, at_legacy, at_zero = self.match_all(dataset)
        class_lrp = lrp_per_class(dataset, at_tau, self.config.tau)
        overall_lrp = mean_lrp(class_lrp)
        class_olrp = optimal_lrp(dataset, self.config.tau, at_tau)
        olrp_with_objects = [
            class_olrp[c] for c, r in class_lrp.items() if r.n_objects > 0
        ]
        ap = average_precision(dataset, at_legacy)
        reports, reasons = self.calibration_reports(
            dataset, at_legacy, at_zero
        )

        result = {
            "lrp": {
                "value": overall_lrp.lrp,
                "loc": overall_lrp.lrp_loc,
                "fp": overall_lrp.lrp_fp,
                "fn": overall_lrp.lrp_fn,
                "n_tp": overall_lrp.n_tp,
                "n_fp": overall_lrp.n_fp,
                "n_fn": overall_lrp.n_fn,
            },
            "olrp": (
                float(np.mean(olrp_with_objects))
                if olrp_with_objects
                else None
            ),
            "ap": ap.mean,
        }
        for measure in self.MEASURES:
            report = reports.get(measure)
            result[measure] = report.value if report else None
        per_class_kernel = {}
        if kernel:
            try:
                per_class_kernel = kernel_ce_per_class(
                    dataset,
                    at_zero,
                    bandwidth=self.config.kernel_bandwidth,
                )
            except ValueError as error:
                reasons[KERNEL_CE] = str(error)
            result[KERNEL_CE] = (
                float(np.mean(list(per_class_kernel.values())))
                if per_class_kernel
                else None
            )
        if coco:
            try:
                reports[COCO_D_ECE] = coco_style_d_ece(
                    dataset, self.config.coco_taus, self.config.dece_bins
                )
            except ValueError as error:
                reasons[COCO_D_ECE] = str(error)
            report = reports.get(COCO_D_ECE)
            result[COCO_D_ECE] = report.value if report else None
        result["reasons"] = reasons

        per_class = {}
        for category_id in dataset.category_ids.tolist():
            row = {}
            if category_id in class_lrp:
                row["lrp"] = class_lrp[category_id].lrp
            if not math.isnan(class_olrp.get(category_id, math.nan)):
                row["olrp"] = class_olrp[category_id]
            if category_id in ap.per_class:
                row["ap"] = ap.per_class[category_id]
            for measure, report in reports.items():
                if category_id in report.per_class:
                    row[measure] = report.per_class[category_id]
            if category_id in per_class_kernel:
                row[KERNEL_CE] = per_class_kernel[category_id]
            if row:
                per_class[str(category_id)] = row
        result["per_class"] = per_class
        result["config"] = self.config.to_dict()
        return result

    def per_class_table(self, report: dict) -> pd.DataFrame:
        """
        The ``per_class`` section of an :meth:`evaluate` report as a table.
        """
        frame = pd.DataFrame.from_dict(report["per_class"], orient="index")
        frame.index.name = "category_id"
        return frame.reset_index()

    def optimal_thresholds(
        self, dataset: Dataset = None, progress: bool = False
    ) -> Dict[int, float]:
        """
        LRP-optimal class thresholds of *dataset* (by default the loaded
        one) at the configured tau.
        """
        dataset = self.dataset if dataset is None else dataset
        return lrp_optimal_thresholds(
            dataset, self.config.tau, progress=progress
        )

    def sweep(
        self, step: float, dataset: Dataset = None, progress: bool = False
    ) -> pd.DataFrame:
        """
        Accuracy and calibration measures over a grid of global confidence
        thresholds ``0, step, 2 * step, ...`` and 1.

        Each matching is computed once; thresholding keeps a score prefix
        of every class, whose greedy assignments do not change.

        Parameters
        ----------
        step : float
            Grid step in (0, 1]
        dataset : Dataset, optional
            Dataset to sweep, by default the loaded one
        progress : bool, optional
            Whether to display a progress bar, by default False

        Returns
        -------
        pd.DataFrame
            One row per threshold; undefined values are NaN
        """
        if not 0 < step <= 1:
            raise ValueError(INVALID_STEP.format(step=step))
        dataset = self.dataset if dataset is None else dataset
        n_steps = int(math.floor(1.0 / step + 1e-9))
        grid = np.round(np.arange(n_steps + 1) * step, 12)
        if grid[-1] < 1:
            grid = np.append(grid, 1.0)
        at_tau, at_legacy, at_zero = self.match_all(dataset)

        rows = []
        for threshold in tqdm(grid.tolist(), disable=not progress):
            keep = dataset.det_scores >= threshold
            kept = dataset.filter_detections(keep)
            kept_tau = at_tau.select(keep)
            reports, _ = self.calibration_reports(
                kept, at_legacy.select(keep), at_zero.select(keep)
            )
            row = {"threshold": threshold}
            for measure in self.MEASURES:
                report = reports.get(measure)
                row[measure] = report.value if report else math.nan
            row["lrp"] = mean_lrp(
                lrp_per_class(kept, kept_tau, self.config.tau)
            ).lrp
            row["ap"] = average_precision(kept, at_legacy.select(keep)).mean
            rows.append(row)
        return pd.DataFrame(rows, columns=self.SWEEP_COLUMNS)

    def binned_report(
        self, measure: str = LA_ECE0, dataset: Dataset = None
    ) -> CalibrationReport:
        """
        Full report (with bins) of a binned measure under the configured
        tau and bin counts.
        """
        if measure not in self.BINNED_MEASURES:
            raise ValueError(
                UNKNOWN_MEASURE.format(
                    measure=measure, available=self.BINNED_MEASURES
                )
            )
        dataset = self.dataset if dataset is None else dataset
        config = self.config
        if measure == D_ECE:
            return d_ece(
                dataset, match(dataset, config.legacy_tau), config.dece_bins
            )
        if measure == LA_ECE:
            return la_ece(
                dataset, match(dataset, config.legacy_tau), config.bins
            )
        return la_ece0(dataset, match(dataset, 0.0), config.bins)

    def reliability(
        self,
        measure: str = LA_ECE0,
        category_id: int = None,
        dataset: Dataset = None,
    ) -> pd.DataFrame:
        """
        Reliability-diagram rows of a binned measure.

        Parameters
        ----------
        measure : str, optional
            ``d_ece``, ``la_ece`` or ``la_ece0``, by default "la_ece0"
        category_id : int, optional
            Restrict to one class, by default all detections pooled
        dataset : Dataset, optional
            By default the loaded one

        Returns
        -------
        pd.DataFrame
            One row per non-empty bin
        """
        return reliability_data(
            self.binned_report(measure, dataset), category_id
        )

    def save_reliability(
        self,
        path: Union[str, Path],
        measure: str = LA_ECE0,
        category_id: int = None,
    ) -> Path:
        return save_reliability_data(
            self.binned_report(measure), path, category_id
        )

    def fit_pipeline(
        self,
        objective: CalibrationObjective = None,
        calibrator: str = "ir",
        class_wise: bool = True,
        use_calibration_threshold: bool = True,
        dataset: Dataset = None,
        progress: bool = False,
    ) -> CalibrationPipeline:
        """
        Train a calibration pipeline on *dataset* (by default the loaded
        one), used as the validation set.
        """
        dataset = self.dataset if dataset is None else dataset
        return train_pipeline(
            dataset,
            objective,
            calibrator,
            class_wise=class_wise,
            use_calibration_threshold=use_calibration_threshold,
            progress=progress,
        )

    def apply_pipeline(
        self, pipeline: CalibrationPipeline, dataset: Dataset = None
    ) -> Dataset:
        dataset = self.dataset if dataset is None else dataset
        return apply_pipeline(pipeline, dataset)

    def split(self, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
        return split(self.dataset, fraction, seed)
