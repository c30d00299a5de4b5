"""Date-indexed price series: CSV ingestion, FX conversion, windowing.

Prices are kept as two parallel numpy arrays (``datetime64[D]`` dates and
float values).  Series are immutable; every operation returns a new one.
"""

from __future__ import annotations

import csv
import datetime as dt
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, InsufficientDataError

__all__ = [
    "DAYS_PER_YEAR",
    "CsvSchema",
    "PricePoint",
    "PriceSeries",
    "TimeWindow",
    "convert_currency",
    "decimal_year",
    "load_csv",
    "slice_window",
    "to_log_price",
    "trading_days",
    "write_csv",
]

DAYS_PER_YEAR = 365.25
DEFAULT_MIN_POINTS = 30


@dataclass(frozen=True)
class PricePoint:
    date: dt.date
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value <= 0:
            raise InputError(f"price on {self.date} must be positive, got {self.value}")


@dataclass(frozen=True)
class TimeWindow:
    t_start: dt.date
    t_last: dt.date

    def __post_init__(self):
        if not self.t_start < self.t_last:
            raise InputError(f"window start {self.t_start} must precede its end {self.t_last}")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Strictly increasing dates with positive values.

    ``skipped`` counts rows dropped at ingest because the value cell was
    empty; it plays no role in any computation.
    """

    dates: np.ndarray
    values: np.ndarray
    label: str = ""
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]").copy()
        values = np.asarray(self.values, dtype=float).copy()
        if dates.ndim != 1 or dates.shape != values.shape:
            raise InputError("dates and values must be 1-d arrays of equal length")
        if dates.size == 0:
            raise InputError("a price series needs at least one observation")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            bad = int(np.flatnonzero(~(values > 0))[0])
            raise InputError(f"price on {dates[bad]} must be positive, got {values[bad]}")
        steps = np.diff(dates).astype(int)
        if np.any(steps <= 0):
            i = int(np.flatnonzero(steps <= 0)[0])
            raise InputError(f"dates must be strictly increasing (at {dates[i + 1]})")
        dates.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_points(cls, points, label: str = "") -> PriceSeries:
        points = list(points)
        return cls(
            np.array([p.date for p in points], dtype="datetime64[D]"),
            np.array([p.value for p in points], dtype=float),
            label,
        )

    @property
    def points(self) -> list[PricePoint]:
        return [PricePoint(d, float(v)) for d, v in zip(self.dates.tolist(), self.values)]

    @property
    def first_date(self) -> dt.date:
        return self.dates[0].item()

    @property
    def last_date(self) -> dt.date:
        return self.dates[-1].item()

    def __len__(self) -> int:
        return self.dates.size

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"PriceSeries(label={self.label!r}, n={len(self)}, "
            f"{self.first_date}..{self.last_date})"
        )


@dataclass(frozen=True)
class CsvSchema:
    date_col: str = "date"
    value_col: str = "value"
    date_format: str | None = None  # None means ISO-8601


def _parse_date(text: str, fmt: str | None) -> dt.date:
    text = text.strip()
    if fmt is None:
        return dt.date.fromisoformat(text)
    return dt.datetime.strptime(text, fmt).date()


def load_csv(path, schema: CsvSchema = CsvSchema(), label: str | None = None) -> PriceSeries:
    """Read a headed UTF-8 CSV into a date-sorted :class:`PriceSeries`.

    Rows whose value cell is blank are skipped and counted in
    ``PriceSeries.skipped``.  Lines starting with ``#`` are comments.  Row
    numbers in error messages are 1-based physical file lines.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    dates, values, skipped = [], [], 0
    with path.open(newline="", encoding="utf-8") as fh:
        kept = [(i, ln) for i, ln in enumerate(fh, start=1) if not ln.startswith("#")]
        reader = csv.DictReader(ln for _, ln in kept)
        header = reader.fieldnames or []
        for col in (schema.date_col, schema.value_col):
            if col not in header:
                raise InputError(f"{path}: missing column {col!r} (have {header})")
        for row in reader:
            lineno = kept[reader.line_num - 1][0]
            raw_value = (row.get(schema.value_col) or "").strip()
            if raw_value == "":
                skipped += 1
                continue
            try:
                date = _parse_date(row[schema.date_col] or "", schema.date_format)
            except ValueError:
                raise InputError(
                    f"{path}: row {lineno}: unparseable date {row[schema.date_col]!r}"
                ) from None
            try:
                value = float(raw_value)
            except ValueError:
                raise InputError(f"{path}: row {lineno}: unparseable value {raw_value!r}") from None
            if not np.isfinite(value) or value <= 0:
                raise InputError(f"{path}: row {lineno}: price must be positive, got {raw_value}")
            dates.append(date)
            values.append(value)
    if not dates:
        raise InputError(f"{path}: no parseable rows")
    dates = np.array(dates, dtype="datetime64[D]")
    values = np.array(values)
    order = np.argsort(dates, kind="stable")
    dates, values = dates[order], values[order]
    dup = np.flatnonzero(np.diff(dates).astype(int) == 0)
    if dup.size:
        raise InputError(f"{path}: duplicate date {dates[dup[0]]}")
    return PriceSeries(dates, values, label if label is not None else path.stem, skipped)


def write_csv(series: PriceSeries, path, header: tuple[str, str] = ("date", "value")) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d, v in zip(series.dates.tolist(), series.values.tolist()):
            w.writerow([d.isoformat(), repr(v)])


_CCY = re.compile(r"\b[A-Z]{3}$")


def convert_currency(prices: PriceSeries, fx: PriceSeries, currency: str) -> PriceSeries:
    """Re-express ``prices`` (currency X) in ``currency`` Y.

    ``fx`` holds the X-per-Y rate, so the converted value is price / rate.
    Only dates present in both series survive.
    """
    common, ip, ifx = np.intersect1d(prices.dates, fx.dates, assume_unique=True, return_indices=True)
    if common.size == 0:
        raise InputError(f"no common dates between {prices.label!r} and {fx.label!r}")
    label = _CCY.sub(currency, prices.label) if _CCY.search(prices.label) else f"{prices.label} {currency}".strip()
    return PriceSeries(common, prices.values[ip] / fx.values[ifx], label)


def slice_window(
    series: PriceSeries, window: TimeWindow, min_points: int = DEFAULT_MIN_POINTS
) -> PriceSeries:
    lo = np.datetime64(window.t_start, "D")
    hi = np.datetime64(window.t_last, "D")
    keep = (series.dates >= lo) & (series.dates <= hi)
    n = int(keep.sum())
    if n < max(min_points, 1):
        raise InsufficientDataError(
            f"window {window.t_start}..{window.t_last} holds {n} points, need {min_points}"
        )
    return PriceSeries(series.dates[keep], series.values[keep], series.label)


def to_log_price(series: PriceSeries) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(t, y)``: decimal years since the first date and ln price."""
    days = (series.dates - series.dates[0]).astype(float)
    return days / DAYS_PER_YEAR, np.log(series.values)


def decimal_year(date: dt.date | dt.datetime) -> float:
    """Calendar decimal year, e.g. 2008-07-02 -> ~2008.5."""
    if not isinstance(date, dt.datetime):
        date = dt.datetime(date.year, date.month, date.day)
    start = dt.datetime(date.year, 1, 1)
    length = (dt.datetime(date.year + 1, 1, 1) - start).total_seconds()
    return date.year + (date - start).total_seconds() / length


def trading_days(start: dt.date, end: dt.date) -> np.ndarray:
    """Weekdays in ``[start, end]`` as ``datetime64[D]``; no holiday calendar."""
    days = np.arange(np.datetime64(start, "D"), np.datetime64(end, "D") + 1)
    return days[np.is_busday(days)]
