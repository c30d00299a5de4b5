"""Shrinking-window scans: many fits with a moving start and a fixed end."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .calibrate import FitConfig, FitResult, fit_window
from .errors import InsufficientDataError, MethodError, ScanFailedError
from .models import KINDS
from .timeseries import PriceSeries, TimeWindow

__all__ = ["ScanConfig", "ScanResult", "ScanRow", "TcSummary", "scan", "tc_summary", "window_starts"]


@dataclass(frozen=True)
class ScanConfig:
    t_start_min: dt.date
    t_start_max: dt.date
    t_last: dt.date
    step: int = 5
    variants: tuple[str, ...] = ("simple",)
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if not self.t_start_min <= self.t_start_max < self.t_last:
            raise ValueError("need t_start_min <= t_start_max < t_last")
        if self.step < 1:
            raise ValueError("step must be >= 1 day")
        unknown = set(self.variants) - set(KINDS)
        if unknown or not self.variants:
            raise ValueError(f"variants must be a non-empty subset of {KINDS}, got {self.variants}")
        # canonical order keeps configs comparable
        object.__setattr__(self, "variants", tuple(k for k in KINDS if k in self.variants))

    def to_dict(self) -> dict:
        return {
            "t_start_min": self.t_start_min.isoformat(),
            "t_start_max": self.t_start_max.isoformat(),
            "t_last": self.t_last.isoformat(),
            "step": self.step,
            "variants": list(self.variants),
            "fit": self.fit.to_dict(),
        }


@dataclass(frozen=True)
class ScanRow:
    t_start: dt.date
    variant: str
    fit: FitResult | None
    skipped: str = ""

    @property
    def qualified(self) -> bool:
        return self.fit is not None and self.fit.qualified


@dataclass(frozen=True)
class TcSummary:
    median: float | None
    iqr: float | None
    fraction_qualified: float
    n_fits: int
    n_qualified: int


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    summary: dict[str, TcSummary]

    CSV_COLUMNS = ("t_start", "variant", "tc", "m", "omega", "rmse", "qualified", "n_points", "status")

    def to_csv(self) -> str:
        """Tidy one-row-per-window table; ``tc`` is a calendar decimal year."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            if r.fit is None:
                w.writerow([r.t_start.isoformat(), r.variant, "", "", "", "", 0, "", r.skipped])
                continue
            f = r.fit
            status = "ok" if f.qualified else ";".join(f.reasons)
            w.writerow(
                [
                    r.t_start.isoformat(),
                    r.variant,
                    repr(float(f.tc_year)),
                    repr(float(f.params.m)),
                    repr(float(f.params.omega)),
                    repr(float(f.rmse)),
                    int(f.qualified),
                    f.n_points,
                    status,
                ]
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "t_start": r.t_start.isoformat(),
                    "variant": r.variant,
                    "skipped": r.skipped or None,
                    "fit": None if r.fit is None else r.fit.to_dict(),
                }
                for r in self.rows
            ],
            "summary": {k: vars(v) for k, v in self.summary.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def window_starts(config: ScanConfig) -> list[dt.date]:
    days = (config.t_start_max - config.t_start_min).days
    return [config.t_start_min + dt.timedelta(days=d) for d in range(0, days + 1, config.step)]


def _fit_task(args):
    data, t_start, t_last, fitcfg, variant = args
    try:
        fit = fit_window(data, TimeWindow(t_start, t_last), fitcfg, variant)
    except InsufficientDataError as exc:
        return ScanRow(t_start, variant, None, f"insufficient data: {exc}")
    except MethodError as exc:
        return ScanRow(t_start, variant, None, f"{type(exc).__name__}: {exc}")
    return ScanRow(t_start, variant, fit)


def tc_summary(result: ScanResult | tuple[ScanRow, ...]) -> dict[str, TcSummary]:
    """Median and interquartile range of tc (decimal years) per variant.

    Only qualified fits enter the statistics; a variant without any has
    ``median`` and ``iqr`` set to ``None``.
    """
    rows = result.rows if isinstance(result, ScanResult) else tuple(result)
    if not rows:
        raise ValueError("empty scan result")
    out = {}
    for variant in dict.fromkeys(r.variant for r in rows):
        fits = [r.fit for r in rows if r.variant == variant and r.fit is not None]
        tcs = np.array([f.tc_year for f in fits if f.qualified], dtype=float)
        frac = tcs.size / len(fits) if fits else 0.0
        if tcs.size:
            q1, med, q3 = np.percentile(tcs, [25, 50, 75])
            out[variant] = TcSummary(float(med), float(q3 - q1), frac, len(fits), int(tcs.size))
        else:
            out[variant] = TcSummary(None, None, frac, len(fits), 0)
    return out


def scan(data: PriceSeries, config: ScanConfig, workers: int = 1) -> ScanResult:
    """Fit every variant on every window ``[t_start, t_last]``.

    Windows too short for ``config.fit.min_points`` and windows whose fit
    fails numerically are kept as skipped rows.  Rows come back sorted by
    variant (in ``KINDS`` order) then ``t_start`` whatever ``workers`` is.
    """
    tasks = [
        (data, start, config.t_last, config.fit, variant)
        for variant in config.variants
        for start in window_starts(config)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_fit_task, tasks))
    else:
        rows = [_fit_task(t) for t in tasks]
    rows.sort(key=lambda r: (KINDS.index(r.variant), r.t_start))
    if not any(r.fit is not None for r in rows):
        raise ScanFailedError(f"no window produced a fit ({len(rows)} attempted)")
    rows = tuple(rows)
    return ScanResult(rows, tc_summary(rows))
