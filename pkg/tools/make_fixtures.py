"""Regenerate the synthetic fixtures in ``src/lpplscan/data``.

Run from the repository root::

    python tools/make_fixtures.py

The output is deterministic; the test suite checks that the shipped files
match a fresh regeneration byte for byte.
"""

import csv
import datetime as dt
import io
import math
import sys
from pathlib import Path

import numpy as np

from lpplscan.models import SimpleParams
from lpplscan.significance import Noise, synth_generate
from lpplscan.timeseries import DAYS_PER_YEAR, trading_days

START, END = dt.date(2006, 5, 29), dt.date(2008, 5, 27)
TC_OFFSET = 0.1
TRUTH = dict(m=0.5, omega=7.0, phi=1.0, A=math.log(130.0), B=-1.0, C=0.05)
COSINE_OMEGA = 6.36


def _dates_and_t():
    dates = trading_days(START, END)
    return dates, (dates - dates[0]).astype(float) / DAYS_PER_YEAR


def truth() -> SimpleParams:
    _, t = _dates_and_t()
    return SimpleParams(tc=float(t[-1]) + TC_OFFSET, **TRUTH)


def synthetic_prices() -> str:
    dates, _ = _dates_and_t()
    p = truth()
    series = synth_generate(p, dates, Noise(sigma=0.005), seed=0)
    buf = io.StringIO()
    buf.write("# synthetic simple-model bubble: iid log-price noise sigma 0.005, seed 0\n")
    buf.write(f"# truth (t in years from {START}): {p.to_dict()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("date", "value"))
    for d, v in zip(series.dates.tolist(), series.values.tolist()):
        w.writerow((d.isoformat(), repr(v)))
    return buf.getvalue()


def cosine_samples() -> str:
    _, t = _dates_and_t()
    x = np.log(t[-1] + TC_OFFSET - t)[::-1]
    buf = io.StringIO()
    buf.write(f"# y = cos({COSINE_OMEGA} x) on x = ln(tc - t) of daily trading times\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y"))
    for a in x:
        w.writerow((repr(float(a)), repr(float(np.cos(COSINE_OMEGA * a)))))
    return buf.getvalue()


FIXTURES = {"synthetic_lppl.csv": synthetic_prices, "cosine_6p36.csv": cosine_samples}


def main(out_dir=None) -> int:
    out = Path(out_dir) if out_dir else Path(__file__).resolve().parents[1] / "src" / "lpplscan" / "data"
    for name, make in FIXTURES.items():
        (out / name).write_text(make(), encoding="utf-8", newline="")
        print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
