"""Changing the numeraire, and two agencies that disagree.

A bubble in dollar prices could partly reflect a weakening dollar.
Re-expressing prices in euros and refitting separates the two.  The
second half summarises the bundled supply/demand fixture, which is a
reconstruction of qualitative relations and not real agency data.

    python demos/04_currency_and_supply.py
"""

import numpy as np

from lpplscan import PriceSeries, TimeWindow, convert_currency, fit_window, load_csv
from lpplscan._data import data_file
from lpplscan.supply_demand import (
    Quarter,
    agency_discrepancy,
    fixture_path,
    gap_series,
    load_flows,
    regime_flag,
)

usd = load_csv(data_file("synthetic_lppl.csv"), label="synthetic USD")

# A made-up USD-per-EUR rate drifting from 1.25 to 1.55, so the euro
# price rises less steeply than the dollar price.
rate = np.linspace(1.25, 1.55, len(usd))
fx = PriceSeries(usd.dates, rate, "USD per EUR")
eur = convert_currency(usd, fx, "EUR")
print(f"converted series label: {eur.label!r}")

for series in (usd, eur):
    fit = fit_window(series, TimeWindow(series.first_date, series.last_date))
    print(f"{series.label:<15} tc {fit.tc_year:.4f}  m {fit.params.m:.3f}  omega {fit.params.omega:.2f}  qualified {fit.qualified}")

flows = load_flows(fixture_path())
cutoff = Quarter(2006, 1)
print("\nquarter   IEA-EIA supply  IEA-EIA demand  EIA demand-supply")
eia_gap = dict(gap_series(flows, "EIA"))
for q, ds, dd in agency_discrepancy(flows, "IEA", "EIA"):
    print(f"{q!s:<10}{ds:>14.2f}{dd:>16.2f}{eia_gap[q]:>19.2f}")

for agency in ("IEA", "EIA"):
    pre, post = regime_flag(flows, agency, cutoff)
    print(f"{agency}: supply above demand in {pre:.0%} of quarters before {cutoff}, {post:.0%} from then on")
