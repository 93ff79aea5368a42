"""Asymptotic null p-values for the seven statistics.

MAX3, CMAX and CLRT depend on the genotype frequencies through the null
correlation of CATT_0 and CATT_1; these are always estimated from the column
margins of the table at hand.  The MAX3 and CMAX tail integrals are evaluated
as the probability mass outside the acceptance region (tail terms summed
directly) rather than as one minus the inside mass, which is the same
quantity but keeps relative accuracy for p-values far below 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .special import (
    F_CMAX_BOX,
    F_MAX3_INNER,
    F_MAX3_OUTER,
    F_MIN2,
    chi2_1_isf,
    chi2_2_sf,
    integrate,
    norm_sf,
    two_sided_normal_p,
)
from .statistics import StatisticKind, all_statistics, N_KINDS
from .tables import ContingencyTable, margins_of


class DegenerateFrequenciesError(ValueError):
    """A homozygote frequency estimate is 0 or 1, so the null correlation is undefined."""


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-10
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 10_000

    def __post_init__(self) -> None:
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class GenotypeFreqEstimate:
    g0: float
    g1: float
    g2: float

    def __post_init__(self) -> None:
        for g in (self.g0, self.g1, self.g2):
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"genotype frequency {g} outside [0, 1]")
        if abs(self.g0 + self.g1 + self.g2 - 1.0) > 1e-12:
            raise ValueError("genotype frequencies must sum to 1")

    @classmethod
    def from_columns(cls, m0: int, m1: int, m2: int) -> GenotypeFreqEstimate:
        big_n = m0 + m1 + m2
        g0 = m0 / big_n
        g2 = m2 / big_n
        return cls(g0, 1.0 - g0 - g2, g2)

    @property
    def degenerate(self) -> bool:
        return not (0.0 < self.g0 < 1.0 and 0.0 < self.g2 < 1.0)

    @property
    def rho(self) -> float:
        """Null correlation of CATT_0 and CATT_1."""
        self._check()
        return math.sqrt(self.g0 * self.g2 / ((1.0 - self.g0) * (1.0 - self.g2)))

    @property
    def omegas(self) -> tuple[float, float]:
        """(omega0, omega1) with CATT_1/2 ~ omega0 CATT_0 + omega1 CATT_1."""
        self._check()
        return _omegas(self.g0, self.g2)

    @property
    def mixture_weight(self) -> float:
        """Asymptotic probability that the data-driven score falls in (0, 1)."""
        return math.acos(self.rho) / math.pi

    def _check(self) -> None:
        if self.degenerate:
            raise DegenerateFrequenciesError(
                f"homozygote frequencies g0={self.g0}, g2={self.g2} must lie in (0, 1)"
            )


# beyond this the binormal law is singular (heterozygote frequency 0)
_RHO_ONE = 1.0 - 1e-12


@njit(cache=True)
def _omegas(g0, g2):
    v0 = g0 * (1.0 - g0)
    v2 = g2 * (1.0 - g2)
    d = v0 + v2 + 2.0 * g0 * g2
    return math.sqrt(v2 / d), math.sqrt(v0 / d)


@njit(cache=True)
def _rho(g0, g2):
    return min(math.sqrt(g0 * g2 / ((1.0 - g0) * (1.0 - g2))), 1.0)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def p_max3_kernel(t, g0, g2, rel_tol, abs_tol, max_sub):
    if t <= 0.0:
        return 1.0
    rho = _rho(g0, g2)
    if rho >= _RHO_ONE:
        # no heterozygotes: every trend statistic is the same normal variate
        return min(2.0 * norm_sf(t), 1.0)
    w0, w1 = _omegas(g0, g2)
    split = (1.0 - w1) * t / w0
    par = np.array([t, rho, math.sqrt(1.0 - rho * rho), w0, w1])
    # outside mass: |Z0| > t, plus for 0 <= Z0 <= t the conditional tails of Z1
    i1, _ = integrate(F_MAX3_INNER, par, 0.0, split, rel_tol, abs_tol, max_sub)
    i2, _ = integrate(F_MAX3_OUTER, par, split, t, rel_tol, abs_tol, max_sub)
    p = 2.0 * norm_sf(t) + 2.0 * (i1 + i2)
    return min(max(p, 0.0), 1.0)


@njit(cache=True)
def p_cmax_kernel(t, g0, g2, rel_tol, abs_tol, max_sub):
    if t <= 0.0:
        return 1.0
    rho = _rho(g0, g2)
    rt = math.sqrt(t)
    if rho >= _RHO_ONE:
        return min(2.0 * norm_sf(rt), 1.0)
    w = math.acos(rho) / math.pi
    par = np.array([rt, rho, math.sqrt(1.0 - rho * rho), 0.0, 0.0])
    box, _ = integrate(F_CMAX_BOX, par, 0.0, rt, rel_tol, abs_tol, max_sub)
    # P(max(Z0^2, Z1^2) >= t) as outside mass of the square
    p_square = 2.0 * norm_sf(rt) + 2.0 * box
    p = w * chi2_2_sf(t) + (1.0 - w) * p_square
    return min(max(p, 0.0), 1.0)


@njit(cache=True)
def p_min2_kernel(t, rel_tol, abs_tol, max_sub):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    q = chi2_1_isf(t)
    upper = -2.0 * math.log(t)
    integral = 0.0
    if upper > q:
        par = np.array([q])
        integral, _ = integrate(F_MIN2, par, q, upper, rel_tol, abs_tol, max_sub)
    p = 0.5 * t + 0.5 * math.exp(-0.5 * q) - integral / (2.0 * math.pi)
    return min(max(p, 0.0), 1.0)


@njit(cache=True)
def asymptotic_p_kernel(kind, value, m0, m1, m2, rel_tol, abs_tol, max_sub):
    """Asymptotic p-value from an ordering value (see ``all_statistics``).

    Returns nan when the margins make the MAX3/CMAX/CLRT null law degenerate.
    """
    if kind == 0 or kind == 6:
        return two_sided_normal_p(value)
    if kind == 1:
        return chi2_2_sf(value)
    if kind == 2:
        return p_min2_kernel(math.exp(-value), rel_tol, abs_tol, max_sub)
    big_n = m0 + m1 + m2
    g0 = m0 / big_n
    g2 = m2 / big_n
    if not (0.0 < g0 < 1.0 and 0.0 < g2 < 1.0):
        return np.nan
    if kind == 3:
        return p_max3_kernel(value, g0, g2, rel_tol, abs_tol, max_sub)
    return p_cmax_kernel(value, g0, g2, rel_tol, abs_tol, max_sub)


@njit(cache=True)
def asymptotic_p_all_kernel(ordering, m0, m1, m2, rel_tol, abs_tol, max_sub, out):
    for k in range(ordering.shape[0]):
        out[k] = asymptotic_p_kernel(k, ordering[k], m0, m1, m2, rel_tol, abs_tol, max_sub)


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def p_catt(value: float) -> float:
    """Two-sided normal tail 2(1 - Phi(|value|))."""
    return float(two_sided_normal_p(value))


def p_mert(value: float) -> float:
    return float(two_sided_normal_p(value))


def p_pearson(value: float) -> float:
    """Chi-square(2) survival e^{-value/2}."""
    if value < 0:
        raise ValueError("Pearson statistic must be non-negative")
    return float(chi2_2_sf(value))


def p_min2(t: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Asymptotic P(MIN2 <= t) under the null."""
    if not 0.0 < t <= 1.0:
        raise ValueError(f"MIN2 threshold must lie in (0, 1], got {t!r}")
    return float(p_min2_kernel(float(t), quad.relative_tolerance, quad.absolute_tolerance,
                               quad.max_subdivisions))


def p_max3(t: float, g: GenotypeFreqEstimate, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Asymptotic P(MAX3 >= t): binormal mass outside the hexagon."""
    if t < 0:
        raise ValueError("MAX3 threshold must be non-negative")
    g._check()
    return float(p_max3_kernel(float(t), g.g0, g.g2, quad.relative_tolerance,
                               quad.absolute_tolerance, quad.max_subdivisions))


def p_cmax(t: float, g: GenotypeFreqEstimate, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Asymptotic P(CMAX >= t); CLRT shares this null law."""
    if t < 0:
        raise ValueError("CMAX threshold must be non-negative")
    g._check()
    return float(p_cmax_kernel(float(t), g.g0, g.g2, quad.relative_tolerance,
                               quad.absolute_tolerance, quad.max_subdivisions))


def asymptotic_p(kind: StatisticKind, t: ContingencyTable,
                 quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    kind = StatisticKind(kind)
    m = margins_of(t)
    ordering = np.empty(N_KINDS)
    all_statistics(t.x0, t.x1, t.x2, m.m0, m.m1, m.m2, m.n1, m.n2, ordering)
    p = asymptotic_p_kernel(int(kind), ordering[kind], m.m0, m.m1, m.m2,
                            quad.relative_tolerance, quad.absolute_tolerance,
                            quad.max_subdivisions)
    if math.isnan(p):
        raise DegenerateFrequenciesError(
            f"{kind.label}: column totals {m.columns} leave a homozygote frequency at 0 or 1"
        )
    return float(p)
