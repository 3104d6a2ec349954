"""
Exceptions raised by :mod:`detection_calibration`.
"""
import numpy as np


class DatasetValidationError(ValueError):
    """
    Raised when a ground-truth, detection, configuration or pipeline file
    does not satisfy the expected format.
    """


class OptimizationError(RuntimeError):
    """
    Raised when an objective becomes non-finite during minimization.

    Parameters
    ----------
    message : str
        Error description
    last_iterate : np.ndarray
        The last parameter vector with a finite objective
    last_value : float
        Objective value at *last_iterate*
    """

    def __init__(
        self,
        message: str,
        last_iterate: np.ndarray = None,
        last_value: float = None,
    ) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate
        self.last_value = last_value
