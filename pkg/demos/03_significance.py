"""Is the oscillation real, and how uncertain is the critical time?

Two checks sit on top of a fit.  The log-periodicity test removes the
best pure power law and looks for a significant Lomb peak in the
remainder as a function of ln(tc - t).  The block bootstrap refits
surrogate series built from the fitted model plus month-long blocks of
its own residuals.

    python demos/03_significance.py
"""

import datetime as dt
import math

import numpy as np

from lpplscan import (
    BootstrapConfig,
    Noise,
    SimpleParams,
    TimeWindow,
    bootstrap_tc_distribution,
    fit_arrays,
    fit_window,
    logperiodicity_test,
    synth_generate,
    to_log_price,
    trading_days,
)

dates = trading_days(dt.date(2006, 5, 29), dt.date(2008, 5, 27))
t_end = (dates[-1] - dates[0]).astype(float) / 365.25


def bubble(C, seed=0):
    p = SimpleParams(t_end + 0.1, 0.5, 7.0, 1.0, math.log(130.0), -1.0, C)
    return synth_generate(p, dates, Noise(sigma=0.005), seed=seed)


# Three series: a log-periodic bubble, a bare power law, and a random walk.
cases = {"LPPL, C = 0.1": to_log_price(bubble(0.1)), "power law, C = 0": to_log_price(bubble(0.0))}
rng = np.random.default_rng(7)
t = cases["LPPL, C = 0.1"][0]
cases["random walk"] = (t, math.log(100.0) + np.cumsum(rng.normal(0.0, 0.01, t.size)))

print(f"{'series':<18}{'qualified':>10}{'fit omega':>11}{'Lomb peak':>11}{'p-value':>10}  verdict")
for name, (t, y) in cases.items():
    fit = fit_arrays(t, y)
    test = logperiodicity_test(fit, t, y)
    print(f"{name:<18}{fit.qualified!s:>10}{fit.params.omega:>11.2f}{test.peak_omega:>11.2f}{test.p_value:>10.1e}  {test.status}")

# A bubble diagnosis needs both: a qualified fit and a significant,
# matching log-periodic peak.

series = bubble(0.05)
fit = fit_window(series, TimeWindow(series.first_date, series.last_date))
boot = bootstrap_tc_distribution(fit, series, BootstrapConfig(n_replicas=40, seed=1))
q05, q50, q95 = (boot.to_year(q) for q in boot.quantiles)
print(f"\nfitted tc {fit.tc_year:.4f}; bootstrap 5/50/95%: {q05:.4f} / {q50:.4f} / {q95:.4f}")
print(f"{boot.n_qualified} of {boot.tcs.size} replicas qualified")
