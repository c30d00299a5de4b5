import math

import numpy as np
import pytest
from conftest import DATES, TC_TRUE, T, synth_arrays, synth_series, truth
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import lombscargle

from lpplscan.calibrate import FitConfig, fit_arrays, fit_window
from lpplscan.errors import InputError, ModelDomainError, UndefinedTestError
from lpplscan.models import evaluate
from lpplscan.significance import (
    DEFAULT_FREQS,
    BootstrapConfig,
    Noise,
    block_resample_residuals,
    bootstrap_arrays,
    bootstrap_tc_distribution,
    false_alarm_probability,
    fit_power_law,
    independent_frequencies,
    lag1_autocorrelation,
    logperiodicity_test,
    lomb_periodogram,
    synth_generate,
)
from lpplscan.timeseries import TimeWindow, to_log_price

# -- block bootstrap ------------------------------------------------------


def test_config_invariants():
    for bad in ({"block_len": 0}, {"n_replicas": 0}):
        with pytest.raises(ValueError):
            BootstrapConfig(**bad)


def test_full_length_block_is_a_rotation():
    r = np.arange(30.0)
    out = block_resample_residuals(r, BootstrapConfig(block_len=30, seed=4))
    k = int(out[0])
    np.testing.assert_array_equal(out, np.roll(r, -k))


def test_unit_blocks_resample_values():
    r = np.random.default_rng(0).normal(size=50)
    out = block_resample_residuals(r, BootstrapConfig(block_len=1, seed=2))
    assert out.size == r.size
    assert set(out) <= set(r)


@settings(max_examples=60, deadline=None)
@given(st.integers(20, 120), st.integers(1, 20), st.integers(0, 10_000))
def test_blocks_keep_length_and_within_block_order(n, L, seed):
    r = np.arange(float(n))
    out = block_resample_residuals(r, BootstrapConfig(block_len=L, seed=seed))
    assert out.size == n
    for s in range(0, n, L):
        block = out[s : s + L]
        np.testing.assert_array_equal(block, (block[0] + np.arange(block.size)) % n)


def test_too_short_series_is_rejected():
    with pytest.raises(InputError):
        block_resample_residuals(np.zeros(10), BootstrapConfig(block_len=21))


def test_surrogate_means_are_unbiased():
    r = np.random.default_rng(1).normal(0.3, 1.0, 200)
    cfg = BootstrapConfig(block_len=10)
    means = np.array([block_resample_residuals(r, cfg, np.random.default_rng((9, i))).mean() for i in range(1000)])
    se = means.std(ddof=1) / math.sqrt(means.size)
    assert abs(means.mean() - r.mean()) < 3 * se


def test_bootstrap_is_deterministic_and_seed_sensitive():
    r = np.random.default_rng(0).normal(size=100)
    a = block_resample_residuals(r, BootstrapConfig(seed=5))
    assert np.array_equal(a, block_resample_residuals(r, BootstrapConfig(seed=5)))
    assert not np.array_equal(a, block_resample_residuals(r, BootstrapConfig(seed=6)))


def test_noiseless_bootstrap_is_a_point_mass():
    t, y = synth_arrays(sigma=0.0)
    fit = fit_arrays(t, y)
    res = bootstrap_arrays(fit.params, t, y, BootstrapConfig(n_replicas=4))
    # residuals are rounding noise, so "identical" holds to optimiser precision
    assert np.ptp(res.tcs) < 1e-6
    assert res.tcs[0] == pytest.approx(fit.params.tc, abs=1e-6)
    assert res.quantiles[2] - res.quantiles[0] < 1e-6


def test_single_replica_collapses_quantiles(bubble):
    series, _ = bubble
    fit = fit_window(series, TimeWindow(series.first_date, series.last_date))
    res = bootstrap_tc_distribution(fit, series, BootstrapConfig(n_replicas=1, seed=3))
    assert res.tcs.size == 1 and res.n_qualified == 1
    assert res.quantiles == (res.tcs[0],) * 3
    assert res.summary()["quantiles_year"]["q50"] == pytest.approx(res.to_year(res.tcs[0]))


def test_bootstrap_workers_do_not_change_replicas(bubble):
    series, _ = bubble
    fit = fit_window(series, TimeWindow(series.first_date, series.last_date))
    cfg = BootstrapConfig(n_replicas=6, seed=1)
    a = bootstrap_tc_distribution(fit, series, cfg, workers=1)
    b = bootstrap_tc_distribution(fit, series, cfg, workers=2)
    assert np.array_equal(a.tcs, b.tcs) and np.array_equal(a.qualified, b.qualified)


def test_bootstrap_without_qualified_replicas_is_undefined():
    t, y = synth_arrays(seed=2)
    fit = fit_arrays(t, y)
    strict = FitConfig(bounds=FitConfig().bounds.__class__(m=(0.89, 0.9)))
    with pytest.raises(UndefinedTestError):
        bootstrap_arrays(fit.params, t, y, BootstrapConfig(n_replicas=2), strict)


def test_bootstrap_needs_converged_fit(bubble):
    import dataclasses

    series, _ = bubble
    fit = fit_window(series, TimeWindow(series.first_date, series.last_date))
    with pytest.raises(InputError):
        bootstrap_tc_distribution(dataclasses.replace(fit, converged=False, qualified=False), series)


# -- Lomb periodogram -----------------------------------------------------

X = np.log(TC_TRUE - T)


def test_matches_scipy_lombscargle():
    rng = np.random.default_rng(0)
    y = np.cos(6.0 * X) + rng.normal(0, 0.5, X.size)
    spectrum = lomb_periodogram(X, y)
    ref = lombscargle(X, y - y.mean(), DEFAULT_FREQS) / np.var(y, ddof=1)
    np.testing.assert_allclose(spectrum.power, ref, rtol=1e-9, atol=1e-12)


def test_cosine_peak_within_one_cell():
    spectrum = lomb_periodogram(X, np.cos(6.36 * X))
    step = DEFAULT_FREQS[1] - DEFAULT_FREQS[0]
    assert abs(spectrum.peak_omega - 6.36) <= step
    assert spectrum.peak == (spectrum.peak_omega, spectrum.peak_power)
    assert spectrum.peak_power == spectrum.power.max()
    assert np.all(spectrum.power >= 0)


def test_constant_y_is_degenerate():
    spectrum = lomb_periodogram(X, np.zeros(X.size))
    assert spectrum.degenerate and spectrum.false_alarm == 1.0
    assert not spectrum.power.any()


def test_input_validation():
    with pytest.raises(InputError):
        lomb_periodogram([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        lomb_periodogram([0.0, 1.0, 1.0, 2.0], [1.0, 2.0, 3.0, 4.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(-1e3, 1e3, allow_nan=False), st.integers(0, 1000))
def test_adding_a_constant_leaves_power_unchanged(c, seed):
    y = np.random.default_rng(seed).normal(size=80)
    x = np.sort(np.random.default_rng(seed + 1).uniform(-3, 1, 80))
    np.testing.assert_allclose(lomb_periodogram(x, y + c).power, lomb_periodogram(x, y).power, rtol=0, atol=1e-10)


def test_white_noise_rarely_crosses_the_99_percent_level():
    below = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = np.log(2.1 - np.sort(rng.uniform(0.0, 2.0, 100)))
        below += lomb_periodogram(x, rng.normal(size=100)).false_alarm >= 0.01
    assert below >= 95


def test_false_alarm_formula():
    assert false_alarm_probability(0.0, 10) == 1.0
    assert false_alarm_probability(5.0, 1.0) == pytest.approx(math.exp(-5.0))
    z = -math.log(1 - 0.99 ** (1 / 30))
    assert false_alarm_probability(z, 30) == pytest.approx(0.01)
    assert independent_frequencies(np.array([0.0, math.pi]), DEFAULT_FREQS) == pytest.approx(18.0)
    assert independent_frequencies(np.array([0.0, 0.01]), DEFAULT_FREQS) == 1.0


# -- log-periodicity test -------------------------------------------------


def test_power_law_refit_recovers_pure_power_law():
    p = truth(C=0.0)
    y = evaluate(p, T)
    tc, m, _A, _B, rmse = fit_power_law(T, y, p.tc + 0.2)
    assert rmse < 1e-6
    assert (tc, m) == pytest.approx((p.tc, p.m), abs=1e-3)
    with pytest.raises(ModelDomainError):
        fit_power_law(T, y, T[-1])


def test_lppl_passes_and_locates_omega():
    t, y = synth_arrays(truth(C=0.1), seed=0)
    fit = fit_arrays(t, y)
    res = logperiodicity_test(fit, t, y)
    assert res.passed and res.p_value < 0.01
    assert abs(res.peak_omega - 7.0) <= 2.0
    assert res.fitted_omega == fit.params.omega


def test_pure_power_law_fails():
    t, y = synth_arrays(truth(C=0.0), seed=0)
    res = logperiodicity_test(fit_arrays(t, y), t, y)
    assert res.status == "fail" and res.p_value >= 0.01


def test_noiseless_power_law_is_undefined():
    p = truth(C=0.0)
    y = evaluate(p, T)
    res = logperiodicity_test(truth(), T, y)
    assert res.status == "undefined" and not res.passed


def test_test_needs_converged_fit():
    import dataclasses

    t, y = synth_arrays(seed=0)
    fit = fit_arrays(t, y)
    with pytest.raises(InputError):
        logperiodicity_test(dataclasses.replace(fit, converged=False, qualified=False), t, y)


def test_lag1_autocorrelation():
    assert lag1_autocorrelation(np.ones(5)) == 0.0
    assert lag1_autocorrelation(np.array([1.0, -1.0] * 50)) == pytest.approx(-0.99)


# -- synth_generate -------------------------------------------------------


def test_noiseless_synth_is_the_model():
    s = synth_generate(truth(), DATES, Noise(sigma=0.0))
    t, y = to_log_price(s)
    np.testing.assert_allclose(y, evaluate(truth(), t), rtol=0, atol=1e-12)


def test_synth_is_deterministic():
    assert synth_series(seed=8) == synth_series(seed=8)
    assert synth_series(seed=8) != synth_series(seed=9)


def test_synth_rejects_dates_past_tc():
    with pytest.raises(ModelDomainError):
        synth_generate(truth(tc=1.0), DATES)


def test_ar1_noise_autocorrelation():
    e = Noise("ar1", sigma=0.01, rho=0.5).draw(2000, np.random.default_rng(0))
    assert lag1_autocorrelation(e) == pytest.approx(0.5, abs=0.1)
    assert np.std(e) == pytest.approx(0.01, rel=0.1)


def test_noise_validation():
    with pytest.raises(ValueError):
        Noise("pink")
    with pytest.raises(ValueError):
        Noise("ar1", 0.01, 1.0)
