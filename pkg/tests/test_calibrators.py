import numpy as np
import pytest

from detection_calibration.calibrators.calibrators import (
    CalibrationTargetPair,
    CalibratorModel,
    IdentityCalibrator,
    IsotonicCalibrator,
    PlattCalibrator,
    TargetPairs,
    TemperatureCalibrator,
    apply,
    binary_cross_entropy,
    fit_isotonic,
    fit_platt,
    fit_temperature,
    logit,
    platt_nll,
    sigmoid,
    temperature_nll,
)

GRID = np.linspace(0, 1, 1001)


def soft_pairs(rng, generator, n=10_000):
    confidences = rng.uniform(0.01, 0.99, n)
    return TargetPairs(confidences, generator(confidences))


def platt_loss(model, pairs):
    logits = logit(pairs.confidences)
    return binary_cross_entropy(model.a * logits + model.b, pairs.targets)


def temperature_loss(model, pairs):
    return binary_cross_entropy(
        logit(pairs.confidences) / model.temperature, pairs.targets
    )


def test_platt_recovers_identity(rng):
    model = fit_platt(soft_pairs(rng, lambda p: p))
    assert model.a == pytest.approx(1, abs=1e-3)
    assert model.b == pytest.approx(0, abs=1e-3)


def test_platt_recovers_planted_parameters(rng):
    model = fit_platt(
        soft_pairs(rng, lambda p: sigmoid(2 * logit(p) + 0.5))
    )
    assert model.a == pytest.approx(2, abs=1e-3)
    assert model.b == pytest.approx(0.5, abs=1e-3)


def test_platt_all_negative_targets(rng):
    pairs = TargetPairs(rng.uniform(0.05, 0.95, 200), np.zeros(200))
    model = fit_platt(pairs)
    assert model.a >= 0
    assert apply(model, pairs.confidences).mean() < 1e-3


def test_temperature_recovers_identity(rng):
    model = fit_temperature(soft_pairs(rng, lambda p: p))
    assert model.temperature == pytest.approx(1, abs=1e-3)


def test_temperature_recovers_planted_temperature(rng):
    model = fit_temperature(soft_pairs(rng, lambda p: sigmoid(logit(p) / 2)))
    assert model.temperature == pytest.approx(2, abs=1e-3)


def test_bias_term_lowers_the_loss(rng):
    pairs = soft_pairs(rng, lambda p: sigmoid(logit(p) + 1))
    platt = platt_loss(fit_platt(pairs), pairs)
    temperature = temperature_loss(fit_temperature(pairs), pairs)
    assert platt <= temperature + 1e-12
    assert platt < temperature


def test_fits_reach_the_grid_minimum(rng):
    for _ in range(5):
        n = int(rng.integers(5, 51))
        pairs = TargetPairs(rng.uniform(size=n), rng.uniform(size=n))
        logits = logit(pairs.confidences)

        platt = fit_platt(pairs)
        start = platt_nll(np.array([1.0, 0.0]), logits, pairs.targets)[0]
        a, b = np.meshgrid(np.linspace(0, 4, 200), np.linspace(-3, 3, 200))
        grid = np.logaddexp(
            0.0, a[..., None] * logits + b[..., None]
        ) - pairs.targets * (a[..., None] * logits + b[..., None])
        assert platt_loss(platt, pairs) <= start + 1e-12
        assert platt_loss(platt, pairs) <= grid.mean(axis=-1).min() + 1e-6

        temperature = fit_temperature(pairs)
        scan = [
            temperature_nll(u, logits, pairs.targets)
            for u in np.linspace(-5, 5, 2001)
        ]
        assert temperature_loss(temperature, pairs) <= min(scan) + 1e-6
        at_one = temperature_nll(0.0, logits, pairs.targets)
        assert temperature_loss(temperature, pairs) <= at_one + 1e-12


def test_fallback_to_identity():
    single = [CalibrationTargetPair(0.4, 1.0)]
    with pytest.warns(UserWarning):
        assert fit_platt(single) == IdentityCalibrator()
    with pytest.warns(UserWarning):
        assert fit_temperature(single) == IdentityCalibrator()
    assert fit_isotonic([]) == IdentityCalibrator()
    assert fit_isotonic(single) == IsotonicCalibrator((0.4,), (1.0,))


def test_isotonic_examples():
    isotone = [
        CalibrationTargetPair(0.2, 0.1),
        CalibrationTargetPair(0.5, 0.4),
        CalibrationTargetPair(0.9, 0.8),
    ]
    model = fit_isotonic(isotone)
    assert model.knots_x == (0.2, 0.5, 0.9)
    assert model.knots_y == (0.1, 0.4, 0.8)
    assert apply(model, 0.5) == 0.4

    pooled = fit_isotonic(
        [CalibrationTargetPair(0.2, 0.5), CalibrationTargetPair(0.4, 0.3)]
    )
    for p in (0.2, 0.3, 0.4):
        assert apply(pooled, p) == pytest.approx(0.4, abs=1e-15)

    constant = fit_isotonic(TargetPairs([0.1, 0.6, 0.7], [0.3, 0.3, 0.3]))
    assert np.allclose(apply(constant, GRID), 0.3)


def test_isotonic_averages_equal_confidences():
    model = fit_isotonic(TargetPairs([0.5, 0.5, 0.8], [0.2, 0.6, 0.9]))
    assert model.knots_x == (0.5, 0.8)
    assert model.knots_y == pytest.approx((0.4, 0.9), abs=1e-15)


def test_isotonic_extrapolates_with_boundary_values():
    model = IsotonicCalibrator((0.3, 0.6), (0.2, 0.5))
    assert apply(model, 0.0) == 0.2
    assert apply(model, 1.0) == 0.5


def test_apply_examples():
    assert apply(IdentityCalibrator(), 0.37) == 0.37
    identity_platt = PlattCalibrator(1.0, 0.0)
    assert apply(identity_platt, GRID) == pytest.approx(GRID, abs=1e-6)
    assert isinstance(apply(identity_platt, 0.5), float)


def test_fitted_calibrators_are_monotone(rng):
    for _ in range(10):
        n = int(rng.integers(2, 300))
        pairs = TargetPairs(rng.uniform(size=n), rng.uniform(size=n))
        for fit in (fit_platt, fit_temperature, fit_isotonic):
            calibrated = apply(fit(pairs), GRID)
            assert np.all(np.diff(calibrated) >= 0)
            assert np.all((calibrated >= 0) & (calibrated <= 1))


def test_model_validation():
    with pytest.raises(ValueError):
        TemperatureCalibrator(0.0)
    with pytest.raises(ValueError):
        PlattCalibrator(-1.0, 0.0)
    with pytest.raises(ValueError):
        IsotonicCalibrator((0.5, 0.2), (0.1, 0.3))
    with pytest.raises(ValueError):
        TargetPairs([0.5], [1.5])
    with pytest.raises(ValueError):
        CalibrationTargetPair(-0.1, 0.5)


def test_models_survive_serialization():
    for model in (
        IdentityCalibrator(),
        TemperatureCalibrator(1.7320508075688772),
        PlattCalibrator(2.0000000000000004, -0.1),
        IsotonicCalibrator((0.1, 0.30000000000000004), (0.2, 0.2)),
    ):
        assert CalibratorModel.from_dict(model.to_dict()) == model
    with pytest.raises(ValueError):
        CalibratorModel.from_dict({"kind": "beta"})
