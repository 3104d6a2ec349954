"""
Calibrator models (identity, temperature scaling, Platt scaling, isotonic
regression) and their fitting on confidence-target pairs.
"""
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np

from detection_calibration.calibrators.messages import (
    FIT_FALLBACK,
    INVALID_KNOTS,
    INVALID_PAIR,
    INVALID_PLATT_SLOPE,
    INVALID_TEMPERATURE,
    MISMATCHED_PAIRS,
    UNKNOWN_MODEL_KIND,
)
from detection_calibration.calibrators.utils import (
    CONFIDENCE_EPS,
    IDENTITY,
    ISOTONIC,
    LOG_TEMPERATURE_BRACKET,
    LOG_TEMPERATURE_TOLERANCE,
    MIN_FIT_PAIRS,
    PLATT,
    TEMPERATURE,
)
from detection_calibration.optimization.golden_section import golden_section
from detection_calibration.optimization.lbfgs import lbfgs
from detection_calibration.optimization.pava import pava


@dataclass(frozen=True)
class CalibrationTargetPair:
    """
    A confidence and the value a calibrated confidence should match: the
    IoU with the matched object (0 for FPs) or a TP/FP indicator.
    """

    confidence: float
    target: float

    def __post_init__(self) -> None:
        if not (0 <= self.confidence <= 1 and 0 <= self.target <= 1):
            raise ValueError(
                INVALID_PAIR.format(
                    confidence=self.confidence, target=self.target
                )
            )


class TargetPairs:
    """
    Column-wise collection of calibration pairs.

    Parameters
    ----------
    confidences : np.ndarray
        ``(n,)`` confidences in [0, 1]
    targets : np.ndarray
        ``(n,)`` targets in [0, 1]
    """

    def __init__(self, confidences: np.ndarray, targets: np.ndarray) -> None:
        self.confidences = np.asarray(confidences, dtype=np.float64).ravel()
        self.targets = np.asarray(targets, dtype=np.float64).ravel()
        if len(self.confidences) != len(self.targets):
            raise ValueError(
                MISMATCHED_PAIRS.format(
                    n_confidences=len(self.confidences),
                    n_targets=len(self.targets),
                )
            )
        for values in (self.confidences, self.targets):
            outside = (values < 0) | (values > 1) | ~np.isfinite(values)
            if outside.any():
                i = int(np.flatnonzero(outside)[0])
                raise ValueError(
                    INVALID_PAIR.format(
                        confidence=self.confidences[i],
                        target=self.targets[i],
                    )
                )

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[CalibrationTargetPair]
    ) -> "TargetPairs":
        return cls(
            [pair.confidence for pair in pairs],
            [pair.target for pair in pairs],
        )

    @property
    def pairs(self) -> Tuple[CalibrationTargetPair, ...]:
        return tuple(
            CalibrationTargetPair(confidence, target)
            for confidence, target in zip(
                self.confidences.tolist(), self.targets.tolist()
            )
        )

    def __len__(self) -> int:
        return len(self.confidences)


Pairs = Union[TargetPairs, Sequence[CalibrationTargetPair]]


def as_target_pairs(pairs: Pairs) -> TargetPairs:
    if isinstance(pairs, TargetPairs):
        return pairs
    return TargetPairs.from_pairs(pairs)


def clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, CONFIDENCE_EPS, 1.0 - CONFIDENCE_EPS)


def logit(p: np.ndarray) -> np.ndarray:
    p = clamp(np.asarray(p, dtype=np.float64))
    return np.log(p) - np.log1p(-p)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -np.asarray(z, dtype=np.float64)))


def binary_cross_entropy(z: np.ndarray, targets: np.ndarray) -> float:
    """
    Mean negative log-likelihood of soft *targets* under probabilities
    ``sigmoid(z)``, evaluated without forming the probabilities.
    """
    return float(np.mean(np.logaddexp(0.0, z) - targets * z))


def platt_nll(
    params: np.ndarray, logits: np.ndarray, targets: np.ndarray
) -> Tuple[float, np.ndarray]:
    """
    Platt scaling loss and its gradient with respect to ``(a, b)``.

    Parameters
    ----------
    params : np.ndarray
        ``(a, b)``
    logits : np.ndarray
        Logits of the (clamped) confidences
    targets : np.ndarray
        Calibration targets

    Returns
    -------
    Tuple[float, np.ndarray]
        Mean NLL of ``sigmoid(a * logit + b)`` and its gradient
    """
    a, b = params
    z = a * logits + b
    residual = sigmoid(z) - targets
    gradient = np.array([np.mean(residual * logits), np.mean(residual)])
    return binary_cross_entropy(z, targets), gradient


def temperature_nll(
    log_temperature: float, logits: np.ndarray, targets: np.ndarray
) -> float:
    return binary_cross_entropy(logits / np.exp(log_temperature), targets)


class CalibratorModel:
    """
    Base class of calibrators: monotone nondecreasing maps of [0, 1] onto
    [0, 1].
    """

    kind = None

    def apply(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    @staticmethod
    def from_dict(document: dict) -> "CalibratorModel":
        """
        Rebuild a model from its :meth:`to_dict` form.
        """
        kind = document.get("kind")
        if kind == IDENTITY:
            return IdentityCalibrator()
        if kind == TEMPERATURE:
            return TemperatureCalibrator(
                float(document["params"]["temperature"])
            )
        if kind == PLATT:
            params = document["params"]
            return PlattCalibrator(float(params["a"]), float(params["b"]))
        if kind == ISOTONIC:
            knots = document["knots"]
            return IsotonicCalibrator(
                tuple(float(x) for x in knots["x"]),
                tuple(float(y) for y in knots["y"]),
            )
        raise ValueError(
            UNKNOWN_MODEL_KIND.format(kind=kind, available=MODEL_KINDS)
        )


@dataclass(frozen=True)
class IdentityCalibrator(CalibratorModel):
    kind = IDENTITY

    def apply(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(p, dtype=np.float64).copy()


@dataclass(frozen=True)
class TemperatureCalibrator(CalibratorModel):
    """
    ``sigmoid(logit(p) / T)``.
    """

    temperature: float
    kind = TEMPERATURE

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(
                INVALID_TEMPERATURE.format(temperature=self.temperature)
            )

    def apply(self, p: np.ndarray) -> np.ndarray:
        return sigmoid(logit(p) / self.temperature)

    def params(self) -> dict:
        return {"temperature": self.temperature}


@dataclass(frozen=True)
class PlattCalibrator(CalibratorModel):
    """
    ``sigmoid(a * logit(p) + b)`` with ``a >= 0``.
    """

    a: float
    b: float
    kind = PLATT

    def __post_init__(self) -> None:
        if not self.a >= 0:
            raise ValueError(INVALID_PLATT_SLOPE.format(a=self.a))

    def apply(self, p: np.ndarray) -> np.ndarray:
        return sigmoid(self.a * logit(p) + self.b)

    def params(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class IsotonicCalibrator(CalibratorModel):
    """
    Piecewise-linear interpolation between knots, constant beyond the
    outermost knots.
    """

    knots_x: Tuple[float, ...]
    knots_y: Tuple[float, ...]
    kind = ISOTONIC

    def __post_init__(self) -> None:
        x = np.asarray(self.knots_x, dtype=np.float64)
        y = np.asarray(self.knots_y, dtype=np.float64)
        if (
            not len(x)
            or len(x) != len(y)
            or np.any(np.diff(x) <= 0)
            or np.any(np.diff(y) < 0)
            or np.any((y < 0) | (y > 1))
        ):
            raise ValueError(INVALID_KNOTS)

    def apply(self, p: np.ndarray) -> np.ndarray:
        return np.interp(
            np.asarray(p, dtype=np.float64), self.knots_x, self.knots_y
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "knots": {"x": list(self.knots_x), "y": list(self.knots_y)},
        }


MODEL_KINDS = (IDENTITY, TEMPERATURE, PLATT, ISOTONIC)


def apply(model: CalibratorModel, p: Union[float, np.ndarray]):
    """
    Calibrated confidence(s) of *p* under *model*; scalars stay scalars.
    """
    calibrated = model.apply(np.asarray(p, dtype=np.float64))
    return float(calibrated) if np.ndim(p) == 0 else calibrated


def _too_few(pairs: TargetPairs, kind: str, minimum: int) -> bool:
    if len(pairs) >= minimum:
        return False
    if len(pairs):
        warnings.warn(
            FIT_FALLBACK.format(kind=kind, minimum=minimum, n_pairs=len(pairs))
        )
    return True


def fit_platt(pairs: Pairs) -> CalibratorModel:
    """
    Fit Platt scaling by minimizing the mean cross-entropy between
    calibrated confidences and targets.

    Parameters
    ----------
    pairs : Pairs
        Calibration pairs

    Returns
    -------
    CalibratorModel
        A :class:`PlattCalibrator`, or the identity with fewer than 2 pairs

    Raises
    ------
    OptimizationError
        If the loss becomes non-finite
    """
    pairs = as_target_pairs(pairs)
    if _too_few(pairs, PLATT, MIN_FIT_PAIRS):
        return IdentityCalibrator()
    logits = logit(pairs.confidences)
    result = lbfgs(
        lambda params: platt_nll(params, logits, pairs.targets),
        np.array([1.0, 0.0]),
        project=lambda params: np.array([max(params[0], 0.0), params[1]]),
    )
    a, b = result.x
    return PlattCalibrator(float(a), float(b))


def fit_temperature(pairs: Pairs) -> CalibratorModel:
    """
    Fit temperature scaling by golden-section search over ``log T``.

    Parameters
    ----------
    pairs : Pairs
        Calibration pairs

    Returns
    -------
    CalibratorModel
        A :class:`TemperatureCalibrator`, or the identity with fewer than 2
        pairs
    """
    pairs = as_target_pairs(pairs)
    if _too_few(pairs, TEMPERATURE, MIN_FIT_PAIRS):
        return IdentityCalibrator()
    logits = logit(pairs.confidences)
    lo, hi = LOG_TEMPERATURE_BRACKET
    result = golden_section(
        lambda u: temperature_nll(u, logits, pairs.targets),
        lo,
        hi,
        tol=LOG_TEMPERATURE_TOLERANCE,
    )
    return TemperatureCalibrator(float(np.exp(result.x[0])))


def fit_isotonic(pairs: Pairs) -> CalibratorModel:
    """
    Fit isotonic regression of targets on confidences.

    Pairs sharing a confidence are averaged first (weighted by their count)
    so that the knots are unique.

    Parameters
    ----------
    pairs : Pairs
        Calibration pairs

    Returns
    -------
    CalibratorModel
        An :class:`IsotonicCalibrator`, or the identity without pairs
    """
    pairs = as_target_pairs(pairs)
    if _too_few(pairs, ISOTONIC, 1):
        return IdentityCalibrator()
    x, inverse, counts = np.unique(
        pairs.confidences, return_inverse=True, return_counts=True
    )
    y = np.bincount(inverse, weights=pairs.targets) / counts
    fitted = np.clip(pava(x, y, counts), 0.0, 1.0)
    return IsotonicCalibrator(tuple(x.tolist()), tuple(fitted.tolist()))


#: Fitting function of every calibrator model kind
FITTERS: Dict[str, Callable[[Pairs], CalibratorModel]] = {
    TEMPERATURE: fit_temperature,
    PLATT: fit_platt,
    ISOTONIC: fit_isotonic,
}
