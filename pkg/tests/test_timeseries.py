import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpplscan.errors import InputError, InsufficientDataError
from lpplscan.timeseries import (
    CsvSchema,
    PricePoint,
    PriceSeries,
    TimeWindow,
    convert_currency,
    decimal_year,
    load_csv,
    slice_window,
    to_log_price,
    trading_days,
    write_csv,
)


def _write(tmp_path, text, name="p.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _series(dates, values, label="WTI USD"):
    return PriceSeries(np.array(dates, dtype="datetime64[D]"), np.array(values, dtype=float), label)


# -- load_csv -------------------------------------------------------------


def test_load_sorts_ascending(tmp_path):
    path = _write(tmp_path, "date,value\n2008-05-27,128.85\n2008-05-23,132.19\n")
    s = load_csv(path)
    assert len(s) == 2
    assert s.first_date == dt.date(2008, 5, 23)
    assert s.last_date == dt.date(2008, 5, 27)
    assert s.values.tolist() == [132.19, 128.85]


def test_load_skips_and_counts_blank_values(tmp_path):
    path = _write(tmp_path, "date,value\n2008-05-22,130.0\n2008-05-23,\n2008-05-27,128.85\n")
    s = load_csv(path)
    assert len(s) == 2
    assert s.skipped == 1


def test_negative_price_is_rejected(tmp_path):
    path = _write(tmp_path, "date,value\n2008-05-22,-3.2\n")
    with pytest.raises(InputError, match="positive"):
        load_csv(path)


@pytest.mark.parametrize(
    "body, needle",
    [
        ("2008-05-22,1.0\n2008-13-01,2.0\n", "row 3"),
        ("2008-05-22,abc\n", "row 2"),
    ],
)
def test_errors_name_the_row(tmp_path, body, needle):
    path = _write(tmp_path, "date,value\n" + body)
    with pytest.raises(InputError, match=needle):
        load_csv(path)


def test_row_numbers_count_comment_lines(tmp_path):
    path = _write(tmp_path, "# source: test\ndate,value\n2008-05-22,1.0\nbad-date,2.0\n")
    with pytest.raises(InputError, match="row 4"):
        load_csv(path)


def test_duplicate_date_is_named(tmp_path):
    path = _write(tmp_path, "date,value\n2008-05-22,1.0\n2008-05-22,2.0\n")
    with pytest.raises(InputError, match="2008-05-22"):
        load_csv(path)


def test_empty_and_missing_inputs(tmp_path):
    with pytest.raises(InputError, match="no parseable rows"):
        load_csv(_write(tmp_path, "date,value\n2008-05-22,\n"))
    with pytest.raises(InputError, match="not found"):
        load_csv(tmp_path / "absent.csv")
    with pytest.raises(InputError, match="missing column"):
        load_csv(_write(tmp_path, "day,close\n2008-05-22,1\n"))


def test_custom_schema(tmp_path):
    path = _write(tmp_path, "Day;Close\n22/05/2008;131.5\n".replace(";", ","))
    s = load_csv(path, CsvSchema("Day", "Close", "%d/%m/%Y"))
    assert s.first_date == dt.date(2008, 5, 22)
    assert s.values[0] == 131.5


def test_write_then_load_roundtrip(tmp_path):
    s = _series(["2008-01-02", "2008-01-03"], [96.0, 99.18], "x")
    write_csv(s, tmp_path / "o.csv")
    assert load_csv(tmp_path / "o.csv", label="x") == s


# -- domain types ---------------------------------------------------------


def test_price_point_and_window_invariants():
    with pytest.raises(ValueError):
        PricePoint(dt.date(2008, 1, 1), 0.0)
    with pytest.raises(ValueError):
        TimeWindow(dt.date(2008, 1, 2), dt.date(2008, 1, 2))


def test_series_rejects_unsorted_or_duplicate_dates():
    with pytest.raises(ValueError):
        _series(["2008-01-03", "2008-01-02"], [1.0, 2.0])
    with pytest.raises(ValueError):
        _series(["2008-01-02", "2008-01-02"], [1.0, 2.0])


def test_series_points_roundtrip():
    s = _series(["2008-01-02", "2008-01-03"], [1.0, 2.0])
    assert PriceSeries.from_points(s.points, s.label) == s


# -- convert_currency -----------------------------------------------------


def test_convert_arithmetic_and_label():
    d = ["2008-05-27"]
    out = convert_currency(_series(d, [100.0]), _series(d, [1.25], "USD per EUR"), "EUR")
    assert out.values.tolist() == [80.0]
    assert out.label == "WTI EUR"


def test_convert_with_unit_rate_is_identity():
    d = ["2008-05-22", "2008-05-23"]
    prices = _series(d, [130.0, 132.0])
    out = convert_currency(prices, _series(d, [1.0, 1.0]), "USD")
    assert np.array_equal(out.values, prices.values)


def test_convert_keeps_only_common_dates():
    prices = _series(["2008-05-21", "2008-05-22"], [1.0, 2.0])
    fx = _series(["2008-05-22", "2008-05-23"], [2.0, 2.0])
    out = convert_currency(prices, fx, "EUR")
    assert out.dates.tolist() == [dt.date(2008, 5, 22)]
    assert out.values.tolist() == [1.0]
    with pytest.raises(InputError):
        convert_currency(prices, _series(["2009-01-02"], [1.0]), "EUR")


positive = st.floats(0.01, 1e4, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(positive, positive), min_size=1, max_size=30))
def test_convert_back_with_reciprocal_rate(pairs):
    dates = trading_days(dt.date(2008, 1, 1), dt.date(2008, 3, 1))[: len(pairs)]
    prices = _series(dates, [p for p, _ in pairs])
    fx = _series(dates, [r for _, r in pairs])
    back = convert_currency(convert_currency(prices, fx, "EUR"), _series(dates, 1.0 / fx.values), "USD")
    np.testing.assert_allclose(back.values, prices.values, rtol=1e-12)


# -- slice_window / to_log_price ------------------------------------------


def _daily(n, start=dt.date(2005, 1, 1)):
    dates = np.arange(np.datetime64(start), np.datetime64(start) + n)
    return _series(dates, np.linspace(50.0, 150.0, n))


def test_full_window_is_identity():
    s = _daily(100)
    assert slice_window(s, TimeWindow(s.first_date, s.last_date)) == s


def test_window_without_points_is_insufficient():
    s = _daily(100)
    with pytest.raises(InsufficientDataError):
        slice_window(s, TimeWindow(dt.date(1990, 1, 1), dt.date(1990, 6, 1)))
    with pytest.raises(InsufficientDataError):
        slice_window(s, TimeWindow(s.first_date, s.first_date + dt.timedelta(days=10)))
    assert len(slice_window(s, TimeWindow(s.first_date, s.first_date + dt.timedelta(days=10)), min_points=5)) == 11


def test_last_100_days_matches_direct_filter():
    s = _daily(1000)
    w = TimeWindow(s.last_date - dt.timedelta(days=100), s.last_date)
    out = slice_window(s, w)
    keep = [(d, v) for d, v in zip(s.dates.tolist(), s.values.tolist()) if w.t_start <= d <= w.t_last]
    assert list(zip(out.dates.tolist(), out.values.tolist())) == keep
    assert out.first_date >= w.t_start


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 400), st.integers(31, 600))
def test_slice_is_idempotent(offset, length):
    s = _daily(1000)
    start = s.first_date + dt.timedelta(days=offset)
    w = TimeWindow(start, start + dt.timedelta(days=length))
    once = slice_window(s, w)
    assert slice_window(once, w) == once


def test_log_price_origin_and_values():
    s = _series(["2008-01-01", "2008-01-02", "2009-01-01"], [1.0, math.e, 2.0])
    t, y = to_log_price(s)
    assert t[0] == 0.0
    assert y[0] == 0.0
    assert y[1] == pytest.approx(1.0, abs=1e-15)
    assert t[2] == pytest.approx(366 / 365.25)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=50))
def test_log_time_strictly_increasing(gaps):
    dates = np.datetime64("2000-01-01") + np.cumsum([0] + gaps)
    t, _ = to_log_price(_series(dates, np.ones(len(dates))))
    assert t[0] == 0.0
    assert np.all(np.diff(t) > 0)


def test_decimal_year_and_trading_days():
    assert decimal_year(dt.date(2008, 1, 1)) == 2008.0
    assert decimal_year(dt.date(2008, 7, 2)) == pytest.approx(2008.5, abs=0.002)
    days = trading_days(dt.date(2008, 5, 23), dt.date(2008, 5, 27))
    assert [str(d) for d in days] == ["2008-05-23", "2008-05-26", "2008-05-27"]
