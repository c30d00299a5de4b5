
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpplscan.errors import InputError
from lpplscan.supply_demand import (
    Quarter,
    QuarterlyFlow,
    agency_discrepancy,
    fixture_path,
    gap_series,
    load_flows,
    regime_flag,
)

FLOWS = load_flows(fixture_path())
CUTOFF = Quarter(2006, 1)


def _flow(y, q, agency, demand, supply):
    return QuarterlyFlow(Quarter(y, q), agency, demand, supply)


def test_quarter_parsing_and_order():
    assert Quarter.parse("2006Q1") == Quarter(2006, 1)
    assert Quarter.parse("2007-q4") == Quarter(2007, 4)
    assert str(Quarter(2005, 3)) == "2005Q3"
    assert Quarter(2005, 4) < Quarter(2006, 1)
    with pytest.raises(InputError):
        Quarter.parse("2006Q5")


def test_flow_validation():
    with pytest.raises(InputError):
        _flow(2006, 0, "EIA", 1.0, 1.0)
    with pytest.raises(InputError):
        _flow(2006, 1, "EIA", -1.0, 1.0)
    with pytest.raises(InputError):
        _flow(2006, 1, "EIA", float("nan"), 1.0)


def test_gap_arithmetic():
    gaps = gap_series([_flow(2006, 2, "X", 86.0, 86.0), _flow(2006, 1, "X", 86.0, 85.0)], "X")
    assert gaps == [(Quarter(2006, 1), pytest.approx(1.0)), (Quarter(2006, 2), 0.0)]
    with pytest.raises(InputError):
        gap_series(FLOWS, "OPEC")


def test_fixture_eia_demand_exceeds_supply_in_last_five_quarters():
    gaps = gap_series(FLOWS, "EIA")
    assert all(g > 0 for _, g in gaps[-5:])
    assert gaps[-6][1] <= 0


def test_fixture_supply_discrepancy_about_one_mbd_since_2006():
    disc = agency_discrepancy(FLOWS, "IEA", "EIA")
    post = [s for q, s, _ in disc if q >= CUTOFF]
    assert post and all(s == pytest.approx(1.0, abs=0.15) for s in post)
    assert all(abs(d) <= 0.3 for _, _, d in disc)


def test_fixture_regime_pre_2006_supply_exceeds_demand():
    for agency in ("IEA", "EIA"):
        pre, post = regime_flag(FLOWS, agency, "2006Q1")
        assert pre == 1.0
        assert 0.0 <= post < 1.0


def test_discrepancy_identical_flows_and_intersection():
    a = [_flow(2006, q, "A", 85.0 + q, 86.0) for q in (1, 2, 3)]
    b = [_flow(2006, q, "B", 85.0 + q, 86.0) for q in (2, 3, 4)]
    disc = agency_discrepancy(a + b, "A", "B")
    assert [q for q, _, _ in disc] == [Quarter(2006, 2), Quarter(2006, 3)]
    assert all(s == 0 and d == 0 for _, s, d in disc)
    with pytest.raises(InputError):
        agency_discrepancy(a + [_flow(2001, 1, "B", 1, 1)], "A", "B")


def test_regime_examples():
    short = [_flow(y, q, "X", 90.0, 85.0) for y in (2005, 2006) for q in (1, 2, 3, 4)]
    assert regime_flag(short, "X", CUTOFF) == (0.0, 0.0)
    mixed = [_flow(2005, 4, "X", 84, 85), _flow(2006, 1, "X", 84, 85), _flow(2006, 2, "X", 86, 85),
             _flow(2006, 3, "X", 85, 85), _flow(2006, 4, "X", 83, 85)]
    # by hand: 2006 quarters with supply > demand are Q1 and Q4
    assert regime_flag(mixed, "X", CUTOFF) == (1.0, 0.5)
    with pytest.raises(InputError):
        regime_flag(mixed, "X", Quarter(2010, 1))


def test_duplicate_rows_are_rejected():
    with pytest.raises(InputError, match="duplicate"):
        gap_series([_flow(2006, 1, "X", 1, 1), _flow(2006, 1, "X", 2, 2)], "X")


def test_load_errors(tmp_path):
    with pytest.raises(InputError):
        load_flows(tmp_path / "nope.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("year,quarter,agency,demand_mbd,supply_mbd\n2006,1,EIA,x,1\n")
    with pytest.raises(InputError, match="row 1"):
        load_flows(bad)


flows_strategy = st.lists(
    st.tuples(st.integers(2000, 2010), st.integers(1, 4), st.floats(50, 100), st.floats(50, 100), st.floats(50, 100), st.floats(50, 100)),
    min_size=1,
    max_size=30,
    unique_by=lambda r: (r[0], r[1]),
)


def _two_agencies(rows):
    return [_flow(y, q, "A", da, sa) for y, q, da, sa, _, _ in rows] + [_flow(y, q, "B", db, sb) for y, q, _, _, db, sb in rows]


@settings(max_examples=60, deadline=None)
@given(flows_strategy)
def test_discrepancy_is_antisymmetric(rows):
    flows = _two_agencies(rows)
    ab = agency_discrepancy(flows, "A", "B")
    ba = agency_discrepancy(flows, "B", "A")
    assert [q for q, *_ in ab] == [q for q, *_ in ba]
    for (_, s1, d1), (_, s2, d2) in zip(ab, ba):
        assert s1 == -s2 and d1 == -d2


@settings(max_examples=60, deadline=None)
@given(flows_strategy, st.randoms(use_true_random=False))
def test_outputs_ignore_row_order(rows, rnd):
    flows = _two_agencies(rows)
    shuffled = flows[:]
    rnd.shuffle(shuffled)
    assert gap_series(shuffled, "A") == gap_series(flows, "A")
    assert agency_discrepancy(shuffled, "A", "B") == agency_discrepancy(flows, "A", "B")


@settings(max_examples=60, deadline=None)
@given(flows_strategy, st.floats(0.1, 10.0))
def test_scaling_inputs_scales_outputs(rows, k):
    flows = _two_agencies(rows)
    scaled = [QuarterlyFlow(f.quarter, f.agency, k * f.demand_mbd, k * f.supply_mbd) for f in flows]
    for (q1, g1), (q2, g2) in zip(gap_series(flows, "A"), gap_series(scaled, "A")):
        assert q1 == q2 and g2 == pytest.approx(k * g1, rel=1e-9, abs=1e-9)
    for (_, s1, d1), (_, s2, d2) in zip(agency_discrepancy(flows, "A", "B"), agency_discrepancy(scaled, "A", "B")):
        assert s2 == pytest.approx(k * s1, rel=1e-9, abs=1e-9)
        assert d2 == pytest.approx(k * d1, rel=1e-9, abs=1e-9)
