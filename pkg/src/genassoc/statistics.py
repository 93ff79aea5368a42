"""The seven robust association statistics for a 2x3 case-control table.

The numeric work lives in numba kernels operating on plain integer counts.
The exact-enumeration and simulation engines call these same kernels, so an
observed table and every enumerated table are scored by one code path.

Conventions for degenerate input:

* a CATT with zero variance (all mass on columns sharing a score) is 0;
* the data-driven score is undefined when a column is empty or the case
  proportions of columns 0 and 2 coincide; CMAX and CLRT then take their
  "otherwise" branch;
* 0 ln 0 = 0 in all likelihood terms;
* the MERT correlation is taken as 0 when a homozygote frequency is 0 or 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .special import SQRT2, chi2_2_sf, log_erfc, two_sided_normal_p
from .tables import ContingencyTable


class StatisticKind(enum.IntEnum):
    CATT_HALF = 0
    PEARSON = 1
    MIN2 = 2
    MAX3 = 3
    CMAX = 4
    CLRT = 5
    MERT = 6

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def direction(self) -> Direction:
        return Direction.SMALL_REJECTS if self is StatisticKind.MIN2 else Direction.LARGE_REJECTS

    @classmethod
    def parse(cls, name: str) -> StatisticKind:
        key = name.strip().lower().replace("-", "_")
        for kind in cls:
            if key in (kind.name.lower(), kind.label.lower()):
                return kind
        if key in ("catt", "catt1/2", "catt_1/2"):
            return cls.CATT_HALF
        raise ValueError(f"unknown statistic {name!r}")


_LABELS = {
    StatisticKind.CATT_HALF: "CATT",
    StatisticKind.PEARSON: "Pearson",
    StatisticKind.MIN2: "MIN2",
    StatisticKind.MAX3: "MAX3",
    StatisticKind.CMAX: "CMAX",
    StatisticKind.CLRT: "CLRT",
    StatisticKind.MERT: "MERT",
}

ALL_KINDS = tuple(StatisticKind)
N_KINDS = len(ALL_KINDS)


class Direction(enum.Enum):
    LARGE_REJECTS = "large"
    SMALL_REJECTS = "small"


@dataclass(frozen=True)
class StatisticValue:
    kind: StatisticKind
    value: float

    @property
    def rejection_direction(self) -> Direction:
        return self.kind.direction


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def catt_kernel(x0, x1, x2, m0, m1, m2, n1, n2, s):
    """CATT with scores (0, s, 1); signed, positive when cases carry more of allele A."""
    big_n = n1 + n2
    num = s * (big_n * x1 - n1 * m1) + (big_n * x2 - n1 * m2)
    # N * sum s_i^2 m_i - (sum s_i m_i)^2, rewritten as a sum of non-negative terms
    spread = s * s * m0 * m1 + (1.0 - s) * (1.0 - s) * m1 * m2 + float(m0 * m2)
    if spread <= 0.0:
        return 0.0
    return num / math.sqrt(n1 * n2 * spread / big_n)


@njit(cache=True)
def pearson_kernel(x0, x1, x2, m0, m1, m2, n1, n2):
    big_n = n1 + n2
    total = 0.0
    denom = float(n1) * float(n2)
    if m0 > 0:
        d = float(big_n * x0 - n1 * m0)
        total += d * d / (m0 * denom)
    if m1 > 0:
        d = float(big_n * x1 - n1 * m1)
        total += d * d / (m1 * denom)
    if m2 > 0:
        d = float(big_n * x2 - n1 * m2)
        total += d * d / (m2 * denom)
    return total


@njit(cache=True)
def score_parts(x0, x1, x2, m0, m1, m2):
    """Numerator and denominator of the data-driven score, cleared of fractions.

    s = num / den; den == 0 flags an undefined score.
    """
    if m0 == 0 or m1 == 0 or m2 == 0:
        return 0, 0
    num = (x1 * m0 - x0 * m1) * m2
    den = (x2 * m0 - x0 * m2) * m1
    return num, den


@njit(cache=True)
def score_in_open_unit(num, den):
    if den > 0:
        return 0 < num < den
    if den < 0:
        return den < num < 0
    return False


@njit(cache=True)
def score_in_closed_unit(num, den):
    if den > 0:
        return 0 <= num <= den
    if den < 0:
        return den <= num <= 0
    return False


@njit(cache=True)
def _g_term(obs, row, col, big_n):
    if obs == 0:
        return 0.0
    return obs * math.log(float(obs) * big_n / (float(row) * col))


@njit(cache=True)
def _g_collapsed(a_case, a_col, b_case, b_col, n1, n2):
    # likelihood-ratio statistic of the 2x2 table with columns a and b
    big_n = n1 + n2
    return 2.0 * (_g_term(a_case, n1, a_col, big_n) + _g_term(a_col - a_case, n2, a_col, big_n)
                  + _g_term(b_case, n1, b_col, big_n) + _g_term(b_col - b_case, n2, b_col, big_n))


@njit(cache=True)
def clrt_kernel(x0, x1, x2, m0, m1, m2, n1, n2):
    num, den = score_parts(x0, x1, x2, m0, m1, m2)
    big_n = n1 + n2
    if score_in_closed_unit(num, den):
        val = 2.0 * (_g_term(x0, n1, m0, big_n) + _g_term(x1, n1, m1, big_n)
                     + _g_term(x2, n1, m2, big_n) + _g_term(m0 - x0, n2, m0, big_n)
                     + _g_term(m1 - x1, n2, m1, big_n) + _g_term(m2 - x2, n2, m2, big_n))
    else:
        rec = _g_collapsed(x0 + x1, m0 + m1, x2, m2, n1, n2)
        dom = _g_collapsed(x0, m0, x1 + x2, m1 + m2, n1, n2)
        val = max(rec, dom)
    return max(val, 0.0)


@njit(cache=True)
def rho_from_columns(m0, m2, big_n):
    """Null correlation of CATT_0 and CATT_1 with genotype frequencies m_i / N."""
    if m0 <= 0 or m2 <= 0 or m0 >= big_n or m2 >= big_n:
        return 0.0
    return math.sqrt(float(m0) * m2 / (float(big_n - m0) * (big_n - m2)))


@njit(cache=True)
def all_statistics(x0, x1, x2, m0, m1, m2, n1, n2, out):
    """Fill ``out`` (length 7, StatisticKind order) with ordering values.

    Larger always means more extreme.  MIN2 is stored as -ln(MIN2) so that
    ordering survives underflow of tiny p-values; CATT and MERT as absolute
    values.
    """
    c0 = catt_kernel(x0, x1, x2, m0, m1, m2, n1, n2, 0.0)
    ch = catt_kernel(x0, x1, x2, m0, m1, m2, n1, n2, 0.5)
    c1 = catt_kernel(x0, x1, x2, m0, m1, m2, n1, n2, 1.0)
    pear = pearson_kernel(x0, x1, x2, m0, m1, m2, n1, n2)
    out[0] = abs(ch)
    out[1] = pear
    out[2] = max(-log_erfc(abs(ch) / SQRT2), 0.5 * pear)
    out[3] = max(abs(c0), abs(ch), abs(c1))
    num, den = score_parts(x0, x1, x2, m0, m1, m2)
    if score_in_open_unit(num, den):
        out[4] = pear
    else:
        out[4] = max(c0 * c0, c1 * c1)
    out[5] = clrt_kernel(x0, x1, x2, m0, m1, m2, n1, n2)
    rho = rho_from_columns(m0, m2, n1 + n2)
    out[6] = abs(c0 + c1) / math.sqrt(2.0 * (1.0 + rho))


@njit(cache=True)
def reported_from_ordering(kind, value):
    """Map an ordering value back to the reported statistic (only MIN2 differs)."""
    if kind == 2:
        return math.exp(-value)
    return value


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def _args(t: ContingencyTable) -> tuple[int, ...]:
    return (t.x0, t.x1, t.x2, t.x0 + t.y0, t.x1 + t.y1, t.x2 + t.y2, t.n1, t.n2)


def catt(t: ContingencyTable, s: float) -> float:
    """Signed Cochran-Armitage trend statistic with scores (0, s, 1)."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("score s must lie in [0, 1]")
    return float(catt_kernel(*_args(t), float(s)))


def pearson(t: ContingencyTable) -> float:
    return float(pearson_kernel(*_args(t)))


def data_driven_score(t: ContingencyTable) -> float | None:
    """(x1/m1 - x0/m0) / (x2/m2 - x0/m0), or None where undefined."""
    x0, x1, x2, m0, m1, m2, _, _ = _args(t)
    num, den = score_parts(x0, x1, x2, m0, m1, m2)
    if den == 0:
        return None
    return num / den


def max3(t: ContingencyTable) -> float:
    return max(abs(catt(t, 0.0)), abs(catt(t, 0.5)), abs(catt(t, 1.0)))


def cmax(t: ContingencyTable) -> float:
    s = data_driven_score(t)
    if s is not None and 0.0 < s < 1.0:
        return pearson(t)
    return max(catt(t, 0.0) ** 2, catt(t, 1.0) ** 2)


def clrt(t: ContingencyTable) -> float:
    """Constrained (monotone-model) likelihood ratio statistic, 2(l_max - l_0) >= 0."""
    return float(clrt_kernel(*_args(t)))


def mert(t: ContingencyTable) -> float:
    """Signed maximin efficiency robust test (CATT_0 + CATT_1) / sqrt(2(1 + rho))."""
    x0, x1, x2, m0, m1, m2, n1, n2 = _args(t)
    rho = rho_from_columns(m0, m2, n1 + n2)
    return (catt(t, 0.0) + catt(t, 1.0)) / math.sqrt(2.0 * (1.0 + rho))


def min2_statistic(t: ContingencyTable) -> float:
    """Smaller of the asymptotic p-values of CATT_1/2 and Pearson; small rejects."""
    p_trend = float(two_sided_normal_p(catt(t, 0.5)))
    p_pearson = float(chi2_2_sf(pearson(t)))
    return min(p_trend, p_pearson)


def statistic(kind: StatisticKind, t: ContingencyTable) -> StatisticValue:
    """Reported value: |CATT|, |MERT| and MIN2 as a p-value-like quantity."""
    kind = StatisticKind(kind)
    if kind is StatisticKind.MIN2:
        return StatisticValue(kind, min2_statistic(t))
    out = np.empty(N_KINDS)
    all_statistics(*_args(t), out)
    return StatisticValue(kind, float(out[kind]))


def ordering_values(t: ContingencyTable) -> np.ndarray:
    """Seven ordering values (larger is more extreme) used by enumeration."""
    out = np.empty(N_KINDS)
    all_statistics(*_args(t), out)
    return out
