import json
import math
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from detection_calibration.utils.data_grabber import DataGrabber
from detection_calibration.utils.messages import MISSING_DATAGRABBER

#: Floats in CSV outputs keep 17 significant digits
CSV_FLOAT_FORMAT = "%.17g"


def validate_instantiation(
    instance: object,
    ground_truth: Union[str, Path] = None,
    detections: Union[str, Path] = None,
    data_grabber: DataGrabber = None,
    top_k: int = 100,
) -> DataGrabber:
    """
    Validates the instantiation of an object with either input files or an
    existing DataGrabber.

    Parameters
    ----------
    instance : object
        The object being instantiated
    ground_truth : Union[str, Path], optional
        COCO annotation file, by default None
    detections : Union[str, Path], optional
        COCO results file, by default None
    data_grabber : DataGrabber, optional
        A DataGrabber instance, already instantiated with its files, by
        default None
    top_k : int, optional
        Detections kept per image, by default 100

    Returns
    -------
    DataGrabber
        An instantiated DataGrabber
    """
    if isinstance(data_grabber, DataGrabber):
        return data_grabber
    if ground_truth:
        return DataGrabber(ground_truth, detections, top_k=top_k)
    raise ValueError(
        MISSING_DATAGRABBER.format(object_name=type(instance).__name__)
    )


def to_serializable(value):
    """
    Recursively convert numpy scalars and arrays to built-in types, and
    non-finite floats to ``None``.
    """
    if isinstance(value, dict):
        return {str(key): to_serializable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_serializable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps_json(document) -> str:
    return json.dumps(to_serializable(document), indent=2) + "\n"


def write_json(document, path: Union[str, Path]) -> Path:
    """
    Write *document* as indented JSON; floats keep their shortest
    round-trip representation.

    Parameters
    ----------
    document : object
        JSON-compatible document (numpy values allowed)
    path : Union[str, Path]
        Destination

    Returns
    -------
    Path
        The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(document), encoding="utf-8")
    return path


def dumps_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT)


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path
