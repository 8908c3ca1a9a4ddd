"""Order fitting, strong-error ladders, scheme comparison, and the I-probes."""

import numpy as np
import pytest

from sde_rand_em import (
    BrownianPath,
    ConfigError,
    DriftSpec,
    ObservableSpec,
    RandomOffsets,
    compare_schemes,
    fit_order,
    fit_points,
    gamma_exponent,
    measure_I1,
    measure_I2,
    predicted_randomised_order,
    predicted_standard_order,
    run_ladder,
    strong_error_estimate,
)
from sde_rand_em.experiments import probe_trajectory_value


# ---------------------------------------------------------------- order fits


def test_fit_exact_power_law():
    ns = np.array([16, 32, 64, 128])
    fit = fit_points(ns, 3.0 * ns ** -0.75)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert not fit.degenerate


def test_fit_constant_errors_slope_zero():
    fit = fit_points([16, 32, 64], [0.2, 0.2, 0.2])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_three_point_hand_value():
    # Independent hand least squares: slope = sum(dx*dy)/sum(dx^2) on logs.
    ns = np.array([16.0, 32.0, 64.0])
    es = np.array([0.1, 0.052, 0.026])
    x = np.log(1.0 / ns)
    y = np.log(es)
    dx = x - x.mean()
    expected = float(np.sum(dx * (y - y.mean())) / np.sum(dx * dx))
    fit = fit_points(ns, es)
    assert fit.slope == pytest.approx(expected, abs=1e-14)
    assert fit.slope == pytest.approx(0.9717, abs=2e-3)


def test_fit_synthetic_injection_exact_slope_one():
    ns = (16, 32, 64, 128, 256)
    fit = fit_points(ns, [1.0 / n for n in ns])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_degenerate_on_zero_errors():
    fit = fit_points([16, 32, 64], [0.0, 0.0, 0.0])
    assert fit.degenerate
    assert fit.note == "degenerate-zero"
    assert fit.prediction_within_band() is None


def test_fit_prediction_band():
    ns = np.array([16, 32, 64, 128])
    fit = fit_points(ns, 2.0 * ns ** -0.8, predicted=0.8)
    assert fit.prediction_within_band() is True
    fit = fit_points(ns, 2.0 * ns ** -0.8, predicted=0.99)
    assert fit.prediction_within_band() is False
    # The +band halfwidth is one-sided: predictions slightly below pass.
    fit = fit_points(ns, 2.0 * ns ** -0.8, predicted=0.9)
    assert fit.prediction_within_band() is True


def test_predicted_orders():
    drift = DriftSpec("product", alpha=0.3, beta=1.0)
    assert gamma_exponent(drift) == pytest.approx(0.3)
    assert predicted_randomised_order(drift) == pytest.approx(0.8)
    assert predicted_standard_order(drift) == pytest.approx(0.3)
    rough_space = DriftSpec("product", alpha=0.9, beta=0.4)
    assert gamma_exponent(rough_space) == pytest.approx(0.2)
    assert predicted_standard_order(rough_space) == pytest.approx(0.7)
    time_free = DriftSpec("space_only", beta=1.0)
    assert predicted_randomised_order(time_free) == pytest.approx(1.0)
    assert predicted_standard_order(time_free) == pytest.approx(1.0)


# ------------------------------------------------------------------- ladders


def test_zero_drift_ladder_vanishes():
    ladder = run_ladder(DriftSpec("zero", d=1), "randomised", (16, 32), 512, 20, 2.0, 5)
    assert float(ladder.estimates.max()) < 1e-12
    assert ladder.envelope_max < 1e-12


def test_constant_drift_ladder_near_zero():
    ladder = run_ladder(DriftSpec("constant", d=2), "standard", (16, 32), 512, 20, 2.0, 5)
    assert float(ladder.estimates.max()) < 1e-10


def test_product_ladder_decreasing_and_bounded():
    drift = DriftSpec("product", alpha=0.25, beta=1.0)
    ladder = run_ladder(drift, "randomised", (16, 32, 64), 1024, 64, 2.0, 11)
    assert np.all(np.diff(ladder.estimates) < 0.0)
    assert np.all(ladder.std_errors > 0.0)
    assert ladder.envelope_max <= drift.amplitude
    fit = fit_order(ladder, predicted_randomised_order(drift))
    assert fit.slope == ladder.fit().slope
    assert fit.predicted == pytest.approx(0.75)


def test_strong_error_single_point_matches_ladder():
    drift = DriftSpec("product", alpha=0.3, beta=1.0)
    est, se = strong_error_estimate(drift, "randomised", 32, 1024, 32, 2.0, 17)
    ladder = run_ladder(drift, "randomised", (16, 32), 1024, 32, 2.0, 17)
    assert est == ladder.estimates[1]
    assert se == ladder.std_errors[1]


def test_ladder_worker_count_invariance():
    drift = DriftSpec("product", alpha=0.3, beta=1.0)
    kwargs = dict(ns=(8, 16), n_ref=256, samples=130, p=2.0, master_seed=23)
    one = run_ladder(drift, "randomised", workers=1, **kwargs)
    two = run_ladder(drift, "randomised", workers=2, **kwargs)
    eight = run_ladder(drift, "randomised", workers=8, **kwargs)
    assert np.array_equal(one.estimates, two.estimates)
    assert np.array_equal(one.estimates, eight.estimates)
    assert np.array_equal(one.std_errors, eight.std_errors)


def test_ladder_validation_errors():
    drift = DriftSpec("product")
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (), 512, 20, 2.0, 1)
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (32, 16), 512, 20, 2.0, 1)
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (16, 32), 256, 20, 2.0, 1)  # n_ref < 16*max
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (24,), 512, 20, 2.0, 1)  # not a divisor
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (16,), 256, 5, 2.0, 1)
    with pytest.raises(ConfigError):
        run_ladder(drift, "randomised", (16,), 256, 20, 0.5, 1)
    with pytest.raises(ConfigError):
        run_ladder(drift, "bogus", (16,), 256, 20, 2.0, 1)


def test_compare_schemes_time_independent_bit_identical():
    drift = DriftSpec("space_only", beta=1.0)
    comparison = compare_schemes(drift, (8, 16, 32), 512, 24, 2.0, 29)
    std = comparison.ladders["standard"]
    rnd = comparison.ladders["randomised"]
    assert np.array_equal(std.estimates, rnd.estimates)
    assert comparison.slope_gap == pytest.approx(0.0, abs=1e-12)


def test_compare_schemes_reports_fits_and_gap():
    drift = DriftSpec("product", alpha=0.3, beta=1.0)
    comparison = compare_schemes(drift, (16, 32, 64), 1024, 48, 2.0, 31)
    assert set(comparison.fits) == {"standard", "randomised"}
    assert comparison.slope_gap is not None
    assert comparison.fits["randomised"].predicted == pytest.approx(0.8)
    assert comparison.fits["standard"].predicted == pytest.approx(0.3)


def test_compare_schemes_lipschitz_time_both_near_order_one():
    # alpha = beta = 1: gamma = 1/2, both schemes run in order-1 territory.
    drift = DriftSpec("product", alpha=1.0, beta=1.0)
    comparison = compare_schemes(drift, (16, 32, 64, 128), 2048, 64, 2.0, 43)
    assert comparison.fits["randomised"].slope >= 0.8
    assert comparison.fits["standard"].slope >= 0.8


# ------------------------------------------------------------------- probes


def test_probe_zero_and_constant_drift_vanish():
    for family in ("zero", "constant"):
        res = measure_I1(DriftSpec(family, d=1), 16, 8, 16, 2.0, 7)
        assert res.estimate == 0.0
        assert res.std_error == 0.0


def test_probe_hand_value_exact():
    # f(t,x) = t, n=2, q=16, tau=(1/2,1/2): exact rational prefix sums give
    # sup = 11/256 (terminal prefix -1/64); path-independent for time-only f.
    drift = DriftSpec("time_only", alpha=1.0, anchor=0.0, amplitude=1.0, d=1)
    offsets = RandomOffsets(np.array([0.5, 0.5]))
    for inc in (np.zeros((32, 1)), 0.1 * np.ones((32, 1))):
        fine = BrownianPath.from_increments(inc)
        value = probe_trajectory_value(drift, fine, offsets, 16)
        assert value == 11.0 / 256.0


def test_probe_hand_value_converges_to_continuous_supremum():
    # With q -> infinity the discrete estimator approaches the exact
    # continuous prefix supremum 1/32 of the parabola u^2/2 - u/4 per branch.
    drift = DriftSpec("time_only", alpha=1.0, anchor=0.0, amplitude=1.0, d=1)
    offsets = RandomOffsets(np.array([0.5, 0.5]))
    q = 4096
    fine = BrownianPath.from_increments(np.zeros((2 * q, 1)))
    value = probe_trajectory_value(drift, fine, offsets, q)
    assert value == pytest.approx(1.0 / 32.0, rel=0.02)


def test_probe_unit_observable_matches_plain_probe_bitwise():
    drift = DriftSpec("product", alpha=0.25, beta=1.0, d=1)
    r1 = measure_I1(drift, 32, 8, 24, 2.0, 13)
    r2 = measure_I2(drift, ObservableSpec("unit", 1), 32, 8, 24, 2.0, 13)
    assert r1.estimate == r2.estimate
    assert r1.std_error == r2.std_error


def test_probe_decreasing_with_resolution():
    drift = DriftSpec("product", alpha=0.25, beta=1.0, d=1)
    g2 = ObservableSpec("smooth_decay", 1)
    i1 = [measure_I1(drift, n, 8, 32, 2.0, 19).estimate for n in (16, 32, 64)]
    i2 = [measure_I2(drift, g2, n, 8, 32, 2.0, 19).estimate for n in (16, 32, 64)]
    assert i1[0] > i1[1] > i1[2]
    assert i2[0] > i2[1] > i2[2]


def test_probe_worker_invariance():
    drift = DriftSpec("product", alpha=0.25, beta=1.0, d=1)
    a = measure_I1(drift, 16, 8, 130, 2.0, 37, workers=1)
    b = measure_I1(drift, 16, 8, 130, 2.0, 37, workers=4)
    assert a.estimate == b.estimate
    assert a.std_error == b.std_error


def test_probe_validation():
    drift = DriftSpec("product", d=1)
    with pytest.raises(ConfigError):
        measure_I1(drift, 16, 4, 16, 2.0, 1)  # q below minimum
    with pytest.raises(ConfigError):
        measure_I1(drift, 16, 8, 4, 2.0, 1)
    with pytest.raises(ConfigError):
        measure_I2(drift, ObservableSpec("unit", 2), 16, 8, 16, 2.0, 1)


def test_probe_envelope_bound():
    drift = DriftSpec("product", alpha=0.25, beta=1.0, d=1)
    res = measure_I1(drift, 64, 8, 32, 2.0, 41)
    assert res.envelope_max <= drift.amplitude
