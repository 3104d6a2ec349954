"""
Reliability-diagram tables derived from binned calibration reports.
"""
from pathlib import Path
from typing import Union

import pandas as pd

from detection_calibration.measures.binned import CalibrationReport
from detection_calibration.measures.messages import UNKNOWN_REPORT_CLASS
from detection_calibration.measures.utils import RELIABILITY_COLUMNS
from detection_calibration.utils.utils import write_csv


def reliability_data(
    report: CalibrationReport, category_id: int = None
) -> pd.DataFrame:
    """
    One row per non-empty bin of *report*.

    Parameters
    ----------
    report : CalibrationReport
        Report of a binned measure
    category_id : int, optional
        Emit the bins of a single class instead of the pooled bins, by
        default None

    Returns
    -------
    pd.DataFrame
        Columns ``bin_low, bin_high, count, mean_conf, target``; the target
        is the measure's own (precision, precision times mean TP IoU, or
        mean IoU with FPs as 0)
    """
    if category_id is None:
        bins = report.bins
    elif category_id in report.class_bins:
        bins = report.class_bins[category_id]
    else:
        raise ValueError(
            UNKNOWN_REPORT_CLASS.format(
                measure=report.measure,
                category_id=category_id,
                available=sorted(report.class_bins),
            )
        )
    return pd.DataFrame(
        [
            [b.bin_low, b.bin_high, b.count, b.mean_confidence, b.target]
            for b in bins
        ],
        columns=RELIABILITY_COLUMNS,
    )


def save_reliability_data(
    report: CalibrationReport,
    path: Union[str, Path],
    category_id: int = None,
) -> Path:
    return write_csv(reliability_data(report, category_id), path)
