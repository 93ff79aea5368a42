import itertools
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from genassoc.tables import (
    ContingencyTable,
    Margins,
    count_tables,
    enumerate_tables,
    is_header,
    margins_of,
    max_summands,
    sweep_order,
)
from oracles import brute_force_tables


@pytest.mark.parametrize("counts, expected", [
    ((10, 20, 30, 30, 20, 10), (40, 40, 40, 60, 60)),
    ((2, 0, 0, 0, 1, 1), (2, 1, 1, 2, 2)),
    ((500, 0, 0, 0, 0, 500), (500, 0, 500, 500, 500)),
])
def test_margins_of(counts, expected):
    assert margins_of(ContingencyTable(*counts)) == Margins(*expected)


def test_table_validation():
    with pytest.raises(ValueError):
        ContingencyTable(-1, 0, 0, 1, 0, 0)
    with pytest.raises(ValueError):
        ContingencyTable(0, 0, 0, 1, 0, 0)
    with pytest.raises(ValueError):
        Margins(1, 1, 1, 1, 1)


def test_parse_roundtrip_and_header():
    t = ContingencyTable.parse(" 1, 2,3,4,5 ,6\n")
    assert t.counts == (1, 2, 3, 4, 5, 6)
    assert ContingencyTable.parse(str(t)) == t
    assert is_header("x0,x1,x2,y0,y1,y2")
    assert not is_header("1,2,3,4,5,6")
    for bad in ("1,2,3", "1,2,3,4,5,x", "1,2,3,4,5,-6"):
        with pytest.raises(ValueError):
            ContingencyTable.parse(bad)


@pytest.mark.parametrize("cols, n1, expected", [
    ((2, 1, 1), 2, {(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)}),
    ((1, 1, 0), 1, {(1, 0, 0), (0, 1, 0)}),
    # forced single table; n2 must stay positive
    ((6, 0, 0), 5, {(5, 0, 0)}),
])
def test_enumerate_examples(cols, n1, expected):
    m = Margins.from_columns(cols, n1)
    got = [(t.x0, t.x1, t.x2) for t in enumerate_tables(m)]
    assert len(got) == len(set(got))
    assert set(got) == expected
    assert count_tables(m) == len(expected)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*(st.integers(0, 9) for _ in range(3))), st.data())
def test_enumeration_matches_brute_force(cols, data):
    total = sum(cols)
    if total < 2:
        return
    n1 = data.draw(st.integers(1, total - 1))
    m = Margins.from_columns(cols, n1)
    lex = [(t.x0, t.x1, t.x2) for t in enumerate_tables(m)]
    assert sorted(lex) == sorted(brute_force_tables(cols, n1))
    assert count_tables(m) == len(lex)
    anchor = data.draw(st.integers(-2, total + 2))
    swept = [(t.x0, t.x1, t.x2) for t in enumerate_tables(m, anchor)]
    assert sorted(swept) == sorted(lex)
    for t in enumerate_tables(m):
        assert margins_of(t) == m


def test_sweep_order_shape():
    m = Margins.from_columns((3, 3, 3), 4)
    assert sweep_order(m, 2) == [2, 3, 1, 0]
    assert sweep_order(m, 10) == [3, 2, 1, 0]


@pytest.mark.parametrize("n1, n2, expected", [
    (500, 500, 83834), (500, 1000, 125751), (1000, 1000, 334334),
    (1000, 2000, 501501), (5000, 5000, 8338334), (5000, 10000, 12507501),
])
def test_max_summands_table(n1, n2, expected):
    assert max_summands(n1, n2) == expected


def test_max_summands_brute_force_small():
    for n1 in range(1, 7):
        for n2 in range(n1, 9):
            best = 0
            for cols in itertools.product(range(n1 + n2 + 1), repeat=2):
                m2 = n1 + n2 - cols[0] - cols[1]
                if m2 < 0:
                    continue
                best = max(best, count_tables(Margins(cols[0], cols[1], m2, n1, n2)))
            assert max_summands(n1, n2) == best, (n1, n2)


def test_max_summands_unbalanced_closed_form():
    assert max_summands(500, 1000) == comb(502, 2)
    with pytest.raises(ValueError):
        max_summands(10, 5)
