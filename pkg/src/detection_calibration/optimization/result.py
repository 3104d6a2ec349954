"""
Definition of the :class:`OptimizeResult` class.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OptimizeResult:
    """
    Outcome of a minimization.

    Attributes
    ----------
    x : np.ndarray
        The parameters found
    fun : float
        Objective value at *x*
    iterations : int
        Number of iterations performed
    converged : bool
        Whether the stopping criterion was met before the iteration cap
    """

    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
