"""
Weighted isotonic regression by pool-adjacent-violators.
"""
import numpy as np

from detection_calibration.optimization.messages import (
    INVALID_PAVA_WEIGHTS,
    MISMATCHED_PAVA_INPUTS,
    UNSORTED_PAVA_INPUTS,
)


def pava(x: np.ndarray, y: np.ndarray, w: np.ndarray = None) -> np.ndarray:
    """
    Nondecreasing weighted least-squares fit of *y*.

    Runs in linear time with a stack of pooled blocks; the value of every
    final block is the weighted mean of its raw members.

    Parameters
    ----------
    x : np.ndarray
        ``(n,)`` strictly ascending abscissae
    y : np.ndarray
        ``(n,)`` values to fit
    w : np.ndarray, optional
        ``(n,)`` positive weights, by default all ones

    Returns
    -------
    np.ndarray
        ``(n,)`` fitted nondecreasing values

    Examples
    --------
    >>> pava([0, 1, 2], [0.3, 0.9, 0.1]).tolist()
    [0.3, 0.5, 0.5]
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64)
    lengths = {len(x), len(y), len(w)}
    if len(lengths) > 1 or not len(y):
        raise ValueError(
            MISMATCHED_PAVA_INPUTS.format(lengths=sorted(lengths))
        )
    if np.any(np.diff(x) <= 0):
        raise ValueError(UNSORTED_PAVA_INPUTS)
    if not np.all(w > 0):
        raise ValueError(INVALID_PAVA_WEIGHTS)

    # each block: [start, weighted sum, total weight]
    blocks = []
    for i in range(len(y)):
        start, total, weight = i, w[i] * y[i], w[i]
        while blocks and blocks[-1][1] / blocks[-1][2] > total / weight:
            start, previous_total, previous_weight = blocks.pop()
            total += previous_total
            weight += previous_weight
        blocks.append([start, total, weight])

    fitted = np.empty_like(y)
    ends = [block[0] for block in blocks[1:]] + [len(y)]
    for (start, _, _), end in zip(blocks, ends):
        members = slice(start, end)
        fitted[members] = np.sum(w[members] * y[members]) / np.sum(w[members])
    return fitted
