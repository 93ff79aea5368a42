"""2x3 case-control genotype tables and the tables that share their margins."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np
from numba import njit

CSV_HEADER = ("x0", "x1", "x2", "y0", "y1", "y2")


@dataclass(frozen=True)
class ContingencyTable:
    """Genotype counts aa, aA, AA for cases (x) and controls (y)."""

    x0: int
    x1: int
    x2: int
    y0: int
    y1: int
    y2: int

    def __post_init__(self) -> None:
        counts = self.counts
        if any(int(c) != c for c in counts):
            raise ValueError(f"counts must be integers: {counts}")
        if min(counts) < 0:
            raise ValueError(f"counts must be non-negative: {counts}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("table needs at least one case and one control")

    @property
    def counts(self) -> tuple[int, int, int, int, int, int]:
        return (self.x0, self.x1, self.x2, self.y0, self.y1, self.y2)

    @property
    def n1(self) -> int:
        return self.x0 + self.x1 + self.x2

    @property
    def n2(self) -> int:
        return self.y0 + self.y1 + self.y2

    @property
    def total(self) -> int:
        return self.n1 + self.n2

    def swap_homozygotes(self) -> ContingencyTable:
        return ContingencyTable(self.x2, self.x1, self.x0, self.y2, self.y1, self.y0)

    def swap_rows(self) -> ContingencyTable:
        return ContingencyTable(self.y0, self.y1, self.y2, self.x0, self.x1, self.x2)

    @classmethod
    def from_cases(cls, cases: tuple[int, int, int], margins: Margins) -> ContingencyTable:
        x0, x1, x2 = cases
        return cls(x0, x1, x2, margins.m0 - x0, margins.m1 - x1, margins.m2 - x2)

    @classmethod
    def parse(cls, line: str) -> ContingencyTable:
        """Parse ``x0,x1,x2,y0,y1,y2``."""
        fields = [f.strip() for f in line.strip().split(",")]
        if len(fields) != 6:
            raise ValueError(f"expected 6 comma-separated counts, got {len(fields)}")
        try:
            values = [int(f) for f in fields]
        except ValueError:
            raise ValueError(f"non-integer count in {line.strip()!r}") from None
        return cls(*values)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.counts)


def is_header(line: str) -> bool:
    return tuple(f.strip().lower() for f in line.strip().split(",")) == CSV_HEADER


@dataclass(frozen=True)
class Margins:
    """Column totals (m0, m1, m2) and row totals (n1, n2)."""

    m0: int
    m1: int
    m2: int
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if min(self.m0, self.m1, self.m2) < 0:
            raise ValueError("column totals must be non-negative")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("row totals must be positive")
        if self.m0 + self.m1 + self.m2 != self.n1 + self.n2:
            raise ValueError(
                f"column totals sum to {self.m0 + self.m1 + self.m2}, "
                f"row totals to {self.n1 + self.n2}"
            )

    @property
    def total(self) -> int:
        return self.n1 + self.n2

    @property
    def columns(self) -> tuple[int, int, int]:
        return (self.m0, self.m1, self.m2)

    @classmethod
    def from_columns(cls, columns: tuple[int, int, int], n1: int) -> Margins:
        m0, m1, m2 = columns
        return cls(m0, m1, m2, n1, m0 + m1 + m2 - n1)

    def x0_range(self) -> range:
        return range(max(0, self.n1 - self.m1 - self.m2), min(self.m0, self.n1) + 1)

    def x1_range(self, x0: int) -> range:
        rest = self.n1 - x0
        return range(max(0, rest - self.m2), min(self.m1, rest) + 1)


def margins_of(t: ContingencyTable) -> Margins:
    return Margins(t.x0 + t.y0, t.x1 + t.y1, t.x2 + t.y2, t.n1, t.n2)


def sweep_order(m: Margins, anchor: int) -> list[int]:
    """x0 values from ``anchor`` upwards, then from ``anchor - 1`` downwards."""
    r = m.x0_range()
    anchor = min(max(anchor, r.start), r.stop - 1)
    return list(range(anchor, r.stop)) + list(range(anchor - 1, r.start - 1, -1))


def enumerate_tables(m: Margins, anchor: int | None = None) -> Iterator[ContingencyTable]:
    """Lazily yield every table with margins ``m``.

    Without ``anchor`` the order is lexicographic in (x0, x1).  With an anchor
    x0 the rows are visited in the probability sweep order of
    :func:`sweep_order`.
    """
    rows = m.x0_range() if anchor is None else sweep_order(m, anchor)
    for x0 in rows:
        for x1 in m.x1_range(x0):
            yield ContingencyTable.from_cases((x0, x1, m.n1 - x0 - x1), m)


@njit(cache=True)
def _c2(k):
    # C(k, 2) with the convention that it vanishes for k < 2
    if k < 2:
        return 0
    return k * (k - 1) // 2


@njit(cache=True)
def _count(m0, m1, m2, n1):
    # bounded compositions of n1 into three parts, by inclusion-exclusion
    a = m0 + 1
    b = m1 + 1
    c = m2 + 1
    k = n1 + 2
    return (_c2(k) - _c2(k - a) - _c2(k - b) - _c2(k - c)
            + _c2(k - a - b) + _c2(k - a - c) + _c2(k - b - c)
            - _c2(k - a - b - c))


@njit(cache=True)
def _max_count(n1, n2):
    total = n1 + n2
    best = 0
    # the count is symmetric in the three column totals, so m0 <= m1 <= m2 suffices
    for m0 in range(total // 3 + 1):
        for m1 in range(m0, (total - m0) // 2 + 1):
            c = _count(m0, m1, total - m0 - m1, n1)
            if c > best:
                best = c
    return best


def count_tables(m: Margins) -> int:
    return int(_count(np.int64(m.m0), np.int64(m.m1), np.int64(m.m2), np.int64(m.n1)))


def max_summands(n1: int, n2: int) -> int:
    """Largest number of tables sharing any column margins, for row totals n1 <= n2."""
    if n1 < 1 or n2 < n1:
        raise ValueError("need 1 <= n1 <= n2")
    if n2 >= 2 * n1:
        return comb(n1 + 2, 2)
    return int(_max_count(np.int64(n1), np.int64(n2)))
