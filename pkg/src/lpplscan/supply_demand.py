"""Quarterly world liquid-fuel supply/demand figures from several agencies.

All quantities are in million barrels per day (Mb/d).  Outputs are sorted
by quarter regardless of input row order, and quarters missing for one
side of a comparison are dropped rather than interpolated.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from ._data import data_file
from .errors import InputError

__all__ = [
    "Quarter",
    "QuarterlyFlow",
    "agency_discrepancy",
    "fixture_path",
    "gap_series",
    "load_flows",
    "regime_flag",
]


class Quarter(NamedTuple):
    year: int
    q: int

    @classmethod
    def parse(cls, text: str) -> Quarter:
        m = re.fullmatch(r"\s*(\d{4})\s*-?\s*[Qq]([1-4])\s*", text)
        if not m:
            raise InputError(f"cannot parse quarter {text!r}; expected e.g. 2006Q1")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self):
        return f"{self.year}Q{self.q}"


@dataclass(frozen=True)
class QuarterlyFlow:
    quarter: Quarter
    agency: str
    demand_mbd: float
    supply_mbd: float

    def __post_init__(self):
        y, q = self.quarter
        if not 1 <= q <= 4:
            raise InputError(f"invalid quarter {self.quarter}")
        object.__setattr__(self, "quarter", Quarter(int(y), int(q)))
        for name in ("demand_mbd", "supply_mbd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InputError(f"{name} must be finite and non-negative, got {v} ({self.agency} {self.quarter})")


def fixture_path() -> Path:
    """Bundled reconstructed fixture (qualitative relations only)."""
    return data_file("supply_demand_reconstructed.csv")


def load_flows(path) -> list[QuarterlyFlow]:
    """Read ``year, quarter, agency, demand_mbd, supply_mbd`` rows.

    Lines starting with ``#`` are comments.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.lstrip().startswith("#")]
    flows = []
    for lineno, row in enumerate(csv.DictReader(lines), start=2):
        try:
            flows.append(
                QuarterlyFlow(
                    Quarter(int(row["year"]), int(row["quarter"])),
                    row["agency"].strip(),
                    float(row["demand_mbd"]),
                    float(row["supply_mbd"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: data row {lineno - 1}: {exc}") from None
    if not flows:
        raise InputError(f"{path}: no data rows")
    return flows


def _by_quarter(flows, agency) -> dict[Quarter, QuarterlyFlow]:
    out = {}
    for f in flows:
        if f.agency != agency:
            continue
        if f.quarter in out:
            raise InputError(f"duplicate {agency} row for {f.quarter}")
        out[f.quarter] = f
    if not out:
        raise InputError(f"no rows for agency {agency!r}")
    return out


def gap_series(flows, agency: str) -> list[tuple[Quarter, float]]:
    """Demand minus supply per quarter; positive means demand exceeds supply."""
    rows = _by_quarter(flows, agency)
    return [(q, rows[q].demand_mbd - rows[q].supply_mbd) for q in sorted(rows)]


def agency_discrepancy(flows, agency_a: str, agency_b: str) -> list[tuple[Quarter, float, float]]:
    """``(quarter, supply_a - supply_b, demand_a - demand_b)`` on common quarters."""
    a = _by_quarter(flows, agency_a)
    b = _by_quarter(flows, agency_b)
    common = sorted(set(a) & set(b))
    if not common:
        raise InputError(f"{agency_a} and {agency_b} share no quarter")
    return [(q, a[q].supply_mbd - b[q].supply_mbd, a[q].demand_mbd - b[q].demand_mbd) for q in common]


def regime_flag(flows, agency: str, cutoff: Quarter | str) -> tuple[float, float]:
    """Fraction of quarters with supply above demand before / from ``cutoff``."""
    if isinstance(cutoff, str):
        cutoff = Quarter.parse(cutoff)
    gaps = gap_series(flows, agency)
    pre = [g for q, g in gaps if q < cutoff]
    post = [g for q, g in gaps if q >= cutoff]
    if not pre or not post:
        raise InputError(f"{agency} data do not span the cutoff {cutoff}")
    return sum(g < 0 for g in pre) / len(pre), sum(g < 0 for g in post) / len(post)
