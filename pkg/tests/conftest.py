import datetime as dt
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from lpplscan.models import SimpleParams
from lpplscan.significance import Noise, synth_generate
from lpplscan.timeseries import DAYS_PER_YEAR, to_log_price, trading_days

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tools"))

START = dt.date(2006, 5, 29)
T_LAST = dt.date(2008, 5, 27)
DATES = trading_days(START, T_LAST)
T = (DATES - DATES[0]).astype(float) / DAYS_PER_YEAR
TC_TRUE = float(T[-1]) + 0.1


def truth(**overrides) -> SimpleParams:
    base = dict(tc=TC_TRUE, m=0.5, omega=7.0, phi=1.0, A=math.log(130.0), B=-1.0, C=0.05)
    base.update(overrides)
    return SimpleParams(**base)


def synth_series(params=None, sigma=0.005, seed=0, dates=DATES):
    return synth_generate(params or truth(), dates, Noise(sigma=sigma), seed=seed)


def synth_arrays(params=None, sigma=0.005, seed=0):
    return to_log_price(synth_series(params, sigma, seed))


def random_walk(seed, sigma=0.01, n=DATES.size):
    rng = np.random.default_rng(1000 + seed)
    return T[:n], math.log(100.0) + np.cumsum(rng.normal(0.0, sigma, n))


@pytest.fixture(scope="session")
def bubble():
    """One noisy synthetic bubble series and its truth."""
    return synth_series(seed=0), truth()


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, title: str, ok, detail: str) -> None:
    """``ok`` is True, False, or None for a criterion that could not run."""
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    line = f"criterion {number:>2} {status}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
