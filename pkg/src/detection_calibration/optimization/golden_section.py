"""
Golden-section search for the minimum of a unimodal function.
"""
from typing import Callable

import numpy as np

from detection_calibration.optimization.messages import (
    INVALID_BRACKET,
    INVALID_TOLERANCE,
)
from detection_calibration.optimization.result import OptimizeResult
from detection_calibration.optimization.utils import (
    GOLDEN_MAX_ITER,
    GOLDEN_RATIO,
)


def golden_section(
    fun: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = GOLDEN_MAX_ITER,
) -> OptimizeResult:
    """
    Shrink ``[lo, hi]`` around the minimum of *fun* until it is narrower
    than *tol*.

    *fun* is only evaluated inside ``[lo, hi]``.

    Parameters
    ----------
    fun : Callable[[float], float]
        Objective, assumed unimodal on ``[lo, hi]``
    lo, hi : float
        The initial bracket
    tol : float, optional
        Final bracket width, by default 1e-10
    max_iter : int, optional
        Iteration cap, by default 500

    Returns
    -------
    OptimizeResult
        The midpoint of the final bracket (as a 1-element array) and its
        objective value
    """
    if not lo < hi:
        raise ValueError(INVALID_BRACKET.format(lo=lo, hi=hi))
    if not tol > 0:
        raise ValueError(INVALID_TOLERANCE.format(tol=tol))
    lo, hi = float(lo), float(hi)
    inner_lo = hi - GOLDEN_RATIO * (hi - lo)
    inner_hi = lo + GOLDEN_RATIO * (hi - lo)
    f_lo, f_hi = fun(inner_lo), fun(inner_hi)

    iterations = 0
    while hi - lo >= tol and iterations < max_iter:
        iterations += 1
        if f_lo <= f_hi:
            hi, inner_hi, f_hi = inner_hi, inner_lo, f_lo
            inner_lo = hi - GOLDEN_RATIO * (hi - lo)
            f_lo = fun(inner_lo)
        else:
            lo, inner_lo, f_lo = inner_lo, inner_hi, f_hi
            inner_hi = lo + GOLDEN_RATIO * (hi - lo)
            f_hi = fun(inner_hi)

    x = (lo + hi) / 2
    return OptimizeResult(
        np.array([x]), float(fun(x)), iterations, hi - lo < tol
    )
