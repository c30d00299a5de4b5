"""Residual block bootstrap, Lomb periodogram and synthetic series.

Bootstrap replicas draw from ``numpy.random.default_rng((seed, index))``
so each replica's stream depends only on the seed and its own index;
running replicas in any order or on any number of workers gives the same
draws.
"""

from __future__ import annotations

import datetime as dt
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import lfilter

from . import simplex
from .calibrate import SEARCH_BOUNDS, Bounds, FitConfig, FitResult, fit_arrays
from .errors import InputError, ModelDomainError, UndefinedTestError
from .models import Params, evaluate, residuals
from .timeseries import DAYS_PER_YEAR, PriceSeries, slice_window, to_log_price

__all__ = [
    "DEFAULT_FREQS",
    "BootstrapConfig",
    "BootstrapResult",
    "LogPeriodicityResult",
    "LombSpectrum",
    "Noise",
    "block_resample_residuals",
    "bootstrap_tc_distribution",
    "false_alarm_probability",
    "fit_power_law",
    "independent_frequencies",
    "logperiodicity_test",
    "lomb_periodogram",
    "synth_generate",
]

DEFAULT_FREQS = np.round(np.arange(2.0, 20.0 + 1e-9, 0.05), 10)
QUANTILES = (0.05, 0.5, 0.95)


@dataclass(frozen=True)
class BootstrapConfig:
    block_len: int = 21
    n_replicas: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.block_len < 1 or self.n_replicas < 1:
            raise ValueError("block_len and n_replicas must be >= 1")


def replica_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng((seed, index))


def block_resample_residuals(residuals, config: BootstrapConfig = BootstrapConfig(), rng=None) -> np.ndarray:
    """Circular block bootstrap surrogate of ``residuals``.

    Blocks of ``block_len`` consecutive values start at uniform random
    offsets, wrap around the end, and are concatenated and truncated to
    the original length.
    """
    r = np.asarray(residuals, dtype=float)
    n, L = r.size, config.block_len
    if n < L:
        raise InputError(f"{n} residuals are fewer than block_len = {L}")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    starts = rng.integers(0, n, size=-(-n // L))
    idx = (starts[:, None] + np.arange(L)) % n
    return r[idx.ravel()[:n]]


@dataclass(frozen=True)
class BootstrapResult:
    """Replica critical times (window-relative years) and their summary.

    ``tcs`` and ``qualified`` hold one entry per replica; ``quantiles``
    are the 5/50/95% points over the qualified replicas only.
    """

    tcs: np.ndarray
    qualified: np.ndarray
    quantiles: tuple[float, float, float]
    origin: dt.date | None = None

    @property
    def n_qualified(self) -> int:
        return int(self.qualified.sum())

    def to_year(self, tc: float) -> float | None:
        if self.origin is None:
            return None
        from .timeseries import decimal_year

        o = dt.datetime(self.origin.year, self.origin.month, self.origin.day)
        return decimal_year(o + dt.timedelta(days=tc * DAYS_PER_YEAR))

    def summary(self) -> dict:
        q = dict(zip(("q05", "q50", "q95"), self.quantiles))
        return {
            "n_replicas": int(self.tcs.size),
            "n_qualified": self.n_qualified,
            "quantiles": q,
            "quantiles_year": {k: self.to_year(v) for k, v in q.items()} if self.origin else None,
        }


def _replica(args):
    params, t, y_model, resid, bcfg, fitcfg, index = args
    rng = replica_rng(bcfg.seed, index)
    y = y_model + block_resample_residuals(resid, bcfg, rng)
    r = fit_arrays(t, y, fitcfg, params.kind)
    return r.params.tc, r.qualified


def bootstrap_arrays(
    params: Params,
    t,
    y,
    config: BootstrapConfig = BootstrapConfig(),
    fitcfg: FitConfig = FitConfig(),
    workers: int = 1,
) -> BootstrapResult:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    y_model = np.asarray(evaluate(params, t))
    resid = y - y_model
    jobs = [(params, t, y_model, resid, config, fitcfg, i) for i in range(config.n_replicas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_replica, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        out = [_replica(j) for j in jobs]
    tcs = np.array([o[0] for o in out])
    ok = np.array([o[1] for o in out], dtype=bool)
    if not ok.any():
        raise UndefinedTestError(f"none of {len(out)} bootstrap replicas gave a qualified fit")
    q = np.quantile(tcs[ok], QUANTILES)
    return BootstrapResult(tcs, ok, tuple(float(v) for v in q))


def bootstrap_tc_distribution(
    fit: FitResult,
    data: PriceSeries,
    config: BootstrapConfig = BootstrapConfig(),
    fitcfg: FitConfig = FitConfig(),
    workers: int = 1,
) -> BootstrapResult:
    """Refit surrogates ``model(fit.params) + block-resampled residuals``.

    ``data`` is the full series; the fit's window selects the slice.
    Replicas whose refit is unqualified are kept in ``tcs`` but excluded
    from the quantiles.
    """
    if not fit.converged:
        raise InputError("bootstrap needs a converged fit")
    sub = data if fit.window is None else slice_window(data, fit.window, fitcfg.min_points)
    t, y = to_log_price(sub)
    res = bootstrap_arrays(fit.params, t, y, config, fitcfg, workers)
    return replace(res, origin=sub.first_date)


# -- Lomb periodogram -----------------------------------------------------


@dataclass(frozen=True)
class LombSpectrum:
    freqs: np.ndarray
    power: np.ndarray
    peak_omega: float
    peak_power: float
    n_independent: float
    degenerate: bool = False

    @property
    def peak(self) -> tuple[float, float]:
        return self.peak_omega, self.peak_power

    @property
    def false_alarm(self) -> float:
        """False-alarm probability of the peak (1.0 when degenerate)."""
        if self.degenerate:
            return 1.0
        return false_alarm_probability(self.peak_power, self.n_independent)


def independent_frequencies(x, freqs) -> float:
    """Approximate count of independent frequencies probed by ``freqs``.

    Frequencies closer than ``pi / span(x)`` are treated as dependent.
    This is half the Fourier spacing, which matches the tail of the
    maximum of a densely scanned white-noise periodogram far better than
    the Fourier count itself.
    """
    span = float(np.ptp(x))
    band = float(np.max(freqs) - np.min(freqs))
    return max(1.0, band * span / math.pi)


def false_alarm_probability(z: float, n_independent: float) -> float:
    """``1 - (1 - exp(-z))**M``, the chance that pure noise reaches power ``z``."""
    return float(-np.expm1(n_independent * np.log1p(-math.exp(-z)))) if z > 0 else 1.0


def lomb_periodogram(x, y, freqs=DEFAULT_FREQS) -> LombSpectrum:
    """Normalised Lomb periodogram over angular frequencies ``freqs``.

    Power is divided by twice the sample variance of ``y`` so pure
    Gaussian noise gives unit-mean exponential power at each frequency.
    Zero-variance ``y`` yields an all-zero spectrum flagged degenerate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if x.size < 4 or x.shape != y.shape:
        raise InputError("Lomb periodogram needs at least 4 (x, y) samples")
    if np.unique(x).size != x.size:
        raise InputError("Lomb periodogram needs distinct x values")
    m_ind = independent_frequencies(x, freqs)
    var = float(np.var(y, ddof=1))
    if var == 0.0:
        zero = np.zeros_like(freqs)
        return LombSpectrum(freqs, zero, float(freqs[0]), 0.0, m_ind, degenerate=True)
    yc = y - y.mean()
    wx = freqs[:, None] * x[None, :]
    tau = 0.5 * np.arctan2(np.sin(2 * wx).sum(axis=1), np.cos(2 * wx).sum(axis=1))
    arg = wx - tau[:, None]
    c, s = np.cos(arg), np.sin(arg)
    power = ((c @ yc) ** 2 / (c * c).sum(axis=1) + (s @ yc) ** 2 / (s * s).sum(axis=1)) / (2.0 * var)
    k = int(np.argmax(power))
    return LombSpectrum(freqs, power, float(freqs[k]), float(power[k]), m_ind)


# -- log-periodicity test -------------------------------------------------


def _power_law_rmse(ln_tau, y, m):
    X = np.column_stack([np.ones_like(ln_tau), np.exp(m * ln_tau)])
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    r = y - X @ beta
    return beta, math.sqrt(float(r @ r) / y.size)


def fit_power_law(t, y, tc: float, free_tc: bool = True, search: Bounds = SEARCH_BOUNDS, tol: float = 1e-12):
    """Best pure power law ``A + B (tc - t)^m``; returns ``(tc, m, A, B, rmse)``.

    With ``free_tc`` the critical time is refined jointly with ``m``
    (simplex over the search box, starting from ``tc``); otherwise ``tc``
    stays fixed and only ``m`` is optimised.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    t_last = float(t.max())
    if not tc > t_last:
        raise ModelDomainError(f"power law evaluated at t >= tc = {tc}")

    def best_m(tc_):
        ln_tau = np.log(tc_ - t)
        opt = minimize_scalar(
            lambda m: _power_law_rmse(ln_tau, y, m)[1], bounds=search.m, method="bounded", options={"xatol": 1e-10}
        )
        return float(opt.x), float(opt.fun)

    if free_tc:
        lo, hi = t_last + search.tc[0], t_last + search.tc[1]
        m0 = best_m(min(max(tc, lo), hi))[0]

        def f(u):
            return _power_law_rmse(np.log(lo + u[0] * (hi - lo) - t), y, u[1])[1]

        u0 = [(min(max(tc, lo), hi) - lo) / (hi - lo), m0]
        res = simplex.minimize(f, u0, [0.02, 0.05], [0.0, search.m[0]], [1.0, search.m[1]], max_iter=1000, tol=tol)
        tc = lo + float(res.x[0]) * (hi - lo)
    m, _ = best_m(tc)
    beta, rmse = _power_law_rmse(np.log(tc - t), y, m)
    return tc, m, float(beta[0]), float(beta[1]), rmse


@dataclass(frozen=True)
class LogPeriodicityResult:
    status: Literal["pass", "fail", "undefined"]
    peak_omega: float
    p_value: float
    fitted_omega: float
    spectrum: LombSpectrum
    noise_rho: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def lag1_autocorrelation(r) -> float:
    r = np.asarray(r, dtype=float) - np.mean(r)
    denom = float(r @ r)
    return float(r[1:] @ r[:-1]) / denom if denom > 0 else 0.0


def logperiodicity_test(
    fit: FitResult | Params,
    t,
    y,
    freqs=DEFAULT_FREQS,
    alpha: float = 0.01,
    omega_tol: float = 2.0,
) -> LogPeriodicityResult:
    """Lomb test for log-periodic structure left by a pure power law.

    The best pure power law ``A + B (tc - t)^m`` (all four parameters
    refitted, starting from the fitted ``tc``) is removed from ``y`` and
    the Lomb spectrum of the remainder is taken against ``ln(tc - t)``.
    Refitting ``tc`` keeps the abscissa independent of the oscillation
    search that produced the fit.  The peak power is rescaled by
    ``(1 - rho) / (1 + rho)`` before the exponential false-alarm formula
    is applied, where ``rho >= 0`` is the lag-1 autocorrelation of the
    full model's residuals; serially correlated noise carries fewer
    independent samples than its length suggests.  The test passes when
    that false-alarm probability is below ``alpha`` and the peak lies
    within ``omega_tol`` of the fitted ``omega``.
    """
    params = fit.params if isinstance(fit, FitResult) else fit
    if isinstance(fit, FitResult) and not fit.converged:
        raise InputError("log-periodicity test needs a converged fit")
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    tc, m, A, B, rmse = fit_power_law(t, y, params.tc)
    tau = tc - t
    resid = y - A - B * tau**m
    x = np.log(tau)
    scale = max(float(np.std(y)), 1e-300)
    if rmse <= 1e-8 * scale:
        # an exact power law leaves only optimiser and rounding noise
        resid = np.zeros_like(resid)
    spectrum = lomb_periodogram(x, resid, freqs)
    if spectrum.degenerate:
        return LogPeriodicityResult("undefined", spectrum.peak_omega, math.nan, params.omega, spectrum)
    rho = min(max(lag1_autocorrelation(residuals(params, t, y)), 0.0), 1.0 - 1e-12)
    z = spectrum.peak_power * (1.0 - rho) / (1.0 + rho)
    p = false_alarm_probability(z, spectrum.n_independent)
    ok = p < alpha and abs(spectrum.peak_omega - params.omega) <= omega_tol
    return LogPeriodicityResult("pass" if ok else "fail", spectrum.peak_omega, p, params.omega, spectrum, rho)


# -- synthetic series -----------------------------------------------------


@dataclass(frozen=True)
class Noise:
    """Additive log-price noise.

    ``sigma`` is the marginal standard deviation; for ``ar1`` the
    innovations are scaled by ``sqrt(1 - rho**2)`` and the process starts
    from its stationary distribution.
    """

    kind: Literal["iid-normal", "ar1"] = "iid-normal"
    sigma: float = 0.0
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iid-normal", "ar1"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0 or not -1 < self.rho < 1:
            raise ValueError("need sigma >= 0 and |rho| < 1")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(n)
        if self.kind == "iid-normal" or self.sigma == 0:
            return self.sigma * z
        scale = math.sqrt(1.0 - self.rho**2)
        # e[0] = z[0], e[i] = rho * e[i-1] + scale * z[i]
        z[0] /= scale
        return self.sigma * lfilter([scale], [1.0, -self.rho], z)


def synth_generate(params: Params, dates, noise: Noise = Noise(), seed: int = 0, label: str = "synthetic") -> PriceSeries:
    """Prices ``exp(model(t) + noise)`` on ``dates``.

    ``t`` is measured in decimal years from the first date, matching
    :func:`to_log_price`.
    """
    dates = np.asarray(dates, dtype="datetime64[D]")
    t = (dates - dates[0]).astype(float) / DAYS_PER_YEAR
    if np.any(t >= params.tc):
        raise ModelDomainError(f"dates reach the critical time tc = {params.tc}")
    y = np.asarray(evaluate(params, t)) + noise.draw(t.size, np.random.default_rng(seed))
    return PriceSeries(dates, np.exp(y), label)
