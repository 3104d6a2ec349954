"""
Limited-memory BFGS with a strong Wolfe line search.

The line search follows Nocedal & Wright (Algorithms 3.5 and 3.6) with
cubic interpolation, as in the pytorch/Paddle L-BFGS optimizers. An
optional projection keeps the iterates feasible (e.g. a nonnegative
parameter); a projected step that does not decrease the objective is
replaced by a backtracking step along the projected gradient.
"""
from collections import deque
from typing import Callable, Deque, Tuple

import numpy as np

from detection_calibration.optimization.messages import NON_FINITE_OBJECTIVE
from detection_calibration.optimization.result import OptimizeResult
from detection_calibration.optimization.utils import (
    CURVATURE_EPS,
    LBFGS_HISTORY,
    LBFGS_MAX_ITER,
    LBFGS_TOLERANCE,
    LINE_SEARCH_TOLERANCE,
    MAX_BACKTRACKS,
    MAX_LINE_SEARCH,
    WOLFE_C1,
    WOLFE_C2,
)
from detection_calibration.utils.exceptions import OptimizationError

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]
Projection = Callable[[np.ndarray], np.ndarray]


def _evaluate(
    fun: Objective, x: np.ndarray, last_x: np.ndarray, last_value: float
) -> Tuple[float, np.ndarray]:
    value, gradient = fun(x)
    value = float(value)
    gradient = np.asarray(gradient, dtype=np.float64)
    if not (np.isfinite(value) and np.all(np.isfinite(gradient))):
        raise OptimizationError(
            NON_FINITE_OBJECTIVE.format(x=x.tolist(), value=value),
            last_iterate=last_x,
            last_value=last_value,
        )
    return value, gradient


def cubic_interpolate(
    x1: float,
    f1: float,
    g1: float,
    x2: float,
    f2: float,
    g2: float,
    bounds: Tuple[float, float] = None,
) -> float:
    """
    Minimizer of the cubic through two points with given values and
    slopes, clipped to *bounds* (default: the interval between the points).
    """
    if bounds is not None:
        low, high = bounds
    else:
        low, high = (x1, x2) if x1 <= x2 else (x2, x1)
    d1 = g1 + g2 - 3 * (f1 - f2) / (x1 - x2)
    d2_square = d1**2 - g1 * g2
    if d2_square < 0:
        return (low + high) / 2.0
    d2 = np.sqrt(d2_square)
    if x1 <= x2:
        position = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2 * d2))
    else:
        position = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2 * d2))
    return float(min(max(position, low), high))


def strong_wolfe(
    phi: Callable[[float], Tuple[float, np.ndarray]],
    direction: np.ndarray,
    alpha: float,
    value: float,
    gradient: np.ndarray,
    c1: float = WOLFE_C1,
    c2: float = WOLFE_C2,
    max_iter: int = MAX_LINE_SEARCH,
    tolerance_change: float = LINE_SEARCH_TOLERANCE,
) -> Tuple[float, np.ndarray, float]:
    """
    Step length satisfying the strong Wolfe conditions along *direction*.

    Parameters
    ----------
    phi : Callable[[float], Tuple[float, np.ndarray]]
        Objective value and gradient at ``x + alpha * direction``
    direction : np.ndarray
        Descent direction
    alpha : float
        Initial step
    value : float
        Objective value at ``alpha = 0``
    gradient : np.ndarray
        Gradient at ``alpha = 0``
    c1, c2 : float, optional
        Sufficient-decrease and curvature constants

    Returns
    -------
    Tuple[float, np.ndarray, float]
        Objective value, gradient and the accepted step
    """
    d_norm = np.abs(direction).max()
    gtd = float(gradient @ direction)
    value_new, gradient_new = phi(alpha)
    gtd_new = float(gradient_new @ direction)

    # bracketing phase
    t_prev, f_prev, g_prev, gtd_prev = 0.0, value, gradient, gtd
    done = False
    iteration = 0
    while iteration < max_iter:
        if value_new > value + c1 * alpha * gtd or (
            iteration > 1 and value_new >= f_prev
        ):
            bracket = [t_prev, alpha]
            bracket_f = [f_prev, value_new]
            bracket_g = [g_prev, gradient_new]
            bracket_gtd = [gtd_prev, gtd_new]
            break
        if abs(gtd_new) <= -c2 * gtd:
            bracket, bracket_f = [alpha], [value_new]
            bracket_g = [gradient_new]
            done = True
            break
        if gtd_new >= 0:
            bracket = [t_prev, alpha]
            bracket_f = [f_prev, value_new]
            bracket_g = [g_prev, gradient_new]
            bracket_gtd = [gtd_prev, gtd_new]
            break

        min_step = alpha + 0.01 * (alpha - t_prev)
        max_step = alpha * 10
        previous = alpha
        alpha = cubic_interpolate(
            t_prev,
            f_prev,
            gtd_prev,
            alpha,
            value_new,
            gtd_new,
            bounds=(min_step, max_step),
        )
        t_prev, f_prev, g_prev, gtd_prev = (
            previous,
            value_new,
            gradient_new,
            gtd_new,
        )
        value_new, gradient_new = phi(alpha)
        gtd_new = float(gradient_new @ direction)
        iteration += 1

    if iteration == max_iter:
        bracket = [0.0, alpha]
        bracket_f = [value, value_new]
        bracket_g = [gradient, gradient_new]

    # zoom phase
    insufficient_progress = False
    low, high = (0, 1) if bracket_f[0] <= bracket_f[-1] else (1, 0)
    while not done and iteration < max_iter:
        if abs(bracket[1] - bracket[0]) * d_norm < tolerance_change:
            break
        alpha = cubic_interpolate(
            bracket[0],
            bracket_f[0],
            bracket_gtd[0],
            bracket[1],
            bracket_f[1],
            bracket_gtd[1],
        )
        # keep trial steps away from the bracket ends
        eps = 0.1 * (max(bracket) - min(bracket))
        if min(max(bracket) - alpha, alpha - min(bracket)) < eps:
            if (
                insufficient_progress
                or alpha >= max(bracket)
                or alpha <= min(bracket)
            ):
                if abs(alpha - max(bracket)) < abs(alpha - min(bracket)):
                    alpha = max(bracket) - eps
                else:
                    alpha = min(bracket) + eps
                insufficient_progress = False
            else:
                insufficient_progress = True
        else:
            insufficient_progress = False

        value_new, gradient_new = phi(alpha)
        gtd_new = float(gradient_new @ direction)
        iteration += 1

        if value_new > value + c1 * alpha * gtd or value_new >= bracket_f[low]:
            bracket[high] = alpha
            bracket_f[high] = value_new
            bracket_g[high] = gradient_new
            bracket_gtd[high] = gtd_new
            low, high = (0, 1) if bracket_f[0] <= bracket_f[1] else (1, 0)
        else:
            if abs(gtd_new) <= -c2 * gtd:
                done = True
            elif gtd_new * (bracket[high] - bracket[low]) >= 0:
                bracket[high] = bracket[low]
                bracket_f[high] = bracket_f[low]
                bracket_g[high] = bracket_g[low]
                bracket_gtd[high] = bracket_gtd[low]
            bracket[low] = alpha
            bracket_f[low] = value_new
            bracket_g[low] = gradient_new
            bracket_gtd[low] = gtd_new

    return bracket_f[low], bracket_g[low], bracket[low]


def two_loop_direction(
    gradient: np.ndarray,
    steps: Deque[np.ndarray],
    changes: Deque[np.ndarray],
) -> np.ndarray:
    """
    ``-H g`` for the inverse-Hessian approximation defined by the stored
    step and gradient-change pairs.
    """
    q = -gradient.copy()
    if not steps:
        return q
    rho = [1.0 / float(y @ s) for s, y in zip(steps, changes)]
    alphas = []
    for s, y, r in reversed(list(zip(steps, changes, rho))):
        a = r * float(s @ q)
        q -= a * y
        alphas.append(a)
    y_last = changes[-1]
    q *= float(steps[-1] @ y_last) / float(y_last @ y_last)
    for (s, y, r), a in zip(zip(steps, changes, rho), reversed(alphas)):
        b = r * float(y @ q)
        q += s * (a - b)
    return q


def projected_gradient_norm(
    x: np.ndarray, gradient: np.ndarray, project: Projection
) -> float:
    return float(np.abs(x - project(x - gradient)).max(initial=0.0))


def _projected_backtracking(
    fun: Objective,
    x: np.ndarray,
    value: float,
    gradient: np.ndarray,
    project: Projection,
):
    step_size = 1.0
    for _ in range(MAX_BACKTRACKS):
        candidate = project(x - step_size * gradient)
        step = candidate - x
        if not np.any(step):
            return None
        candidate_value, candidate_gradient = _evaluate(
            fun, candidate, x, value
        )
        if candidate_value <= value + WOLFE_C1 * float(gradient @ step):
            return candidate, candidate_value, candidate_gradient
        step_size *= 0.5
    return None


def lbfgs(
    fun: Objective,
    x0: np.ndarray,
    tol: float = LBFGS_TOLERANCE,
    max_iter: int = LBFGS_MAX_ITER,
    history: int = LBFGS_HISTORY,
    project: Projection = None,
) -> OptimizeResult:
    """
    Minimize *fun* with L-BFGS.

    Parameters
    ----------
    fun : Callable[[np.ndarray], Tuple[float, np.ndarray]]
        Objective returning its value and gradient
    x0 : np.ndarray
        Starting point
    tol : float, optional
        Stop once the (projected) gradient's infinity norm is below this,
        by default 1e-8
    max_iter : int, optional
        Iteration cap, by default 200
    history : int, optional
        Number of stored curvature pairs, by default 10
    project : Callable[[np.ndarray], np.ndarray], optional
        Projection onto the feasible set, by default none

    Returns
    -------
    OptimizeResult
        The final iterate; the objective never increases between accepted
        iterates

    Raises
    ------
    OptimizationError
        If the objective or its gradient becomes non-finite; the error
        carries the last finite iterate
    """
    if project is None:
        project = lambda x: x  # noqa: E731
    x = project(np.array(x0, dtype=np.float64))
    value, gradient = _evaluate(fun, x, None, None)
    steps: Deque[np.ndarray] = deque(maxlen=history)
    changes: Deque[np.ndarray] = deque(maxlen=history)

    iteration = 0
    while True:
        if projected_gradient_norm(x, gradient, project) < tol:
            return OptimizeResult(x, value, iteration, True)
        if iteration >= max_iter:
            return OptimizeResult(x, value, iteration, False)
        iteration += 1

        direction = two_loop_direction(gradient, steps, changes)
        if not float(gradient @ direction) < 0:
            steps.clear()
            changes.clear()
            direction = -gradient
        if steps:
            alpha = 1.0
        else:
            alpha = min(1.0, 1.0 / np.abs(gradient).sum())

        def phi(step: float, x=x, value=value, direction=direction):
            return _evaluate(fun, x + step * direction, x, value)

        value_new, gradient_new, alpha = strong_wolfe(
            phi, direction, alpha, value, gradient
        )
        x_new = x + alpha * direction
        projected = project(x_new)
        if not np.array_equal(projected, x_new):
            x_new = projected
            value_new, gradient_new = _evaluate(fun, x_new, x, value)

        if not value_new <= value or not np.any(x_new != x):
            fallback = _projected_backtracking(
                fun, x, value, gradient, project
            )
            if fallback is None:
                return OptimizeResult(
                    x,
                    value,
                    iteration,
                    projected_gradient_norm(x, gradient, project) < tol,
                )
            x_new, value_new, gradient_new = fallback

        s, y = x_new - x, gradient_new - gradient
        if float(s @ y) > CURVATURE_EPS:
            steps.append(s)
            changes.append(y)
        x, value, gradient = x_new, value_new, gradient_new
