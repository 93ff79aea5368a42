"""Exact conditional p-values by enumerating all tables with the observed margins.

Given the column totals, the case counts follow a trivariate hypergeometric
law.  The p-value of a statistic is the total conditional probability of the
tables at least as extreme as the observed one.  One pass accumulates the
sums for all seven statistics.  The pass starts at the observed x0 and works
outwards (high-probability tables first), and it can stop early once every
tracked sum has passed a threshold.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import numba
from numba import njit, prange
from scipy.special import gammaln

from .statistics import ALL_KINDS, N_KINDS, StatisticKind, all_statistics
from .tables import ContingencyTable, margins_of

# Relative tolerance for deciding that an enumerated table ties the observed one.
TIE_TOLERANCE = 1e-12

_NO_THRESHOLD = -1.0
_ABORTED = -1.0


class LogFactorialTable:
    """ln(l!) for l = 0..n_max, computed once and read-only afterwards."""

    def __init__(self, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        values = gammaln(np.arange(n_max + 1, dtype=float) + 1.0)
        values[:2] = 0.0
        values.setflags(write=False)
        self.values = values

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def __getitem__(self, l: int) -> float:
        return float(self.values[l])

    def __len__(self) -> int:
        return self.values.shape[0]


_shared_lock = threading.Lock()
_shared: LogFactorialTable | None = None


def log_factorials(n: int) -> LogFactorialTable:
    """Process-wide table covering at least 0..n (rebuilt larger when needed)."""
    global _shared
    with _shared_lock:
        if _shared is None or _shared.n_max < n:
            _shared = LogFactorialTable(max(n, 2 * (_shared.n_max if _shared else 0), 1024))
        return _shared


class Ordering(enum.Enum):
    PROBABILITY_SWEEP = "sweep"
    LEXICOGRAPHIC = "lex"


@dataclass(frozen=True)
class EnumerationOptions:
    """``abort_threshold`` None means the full sum is always computed."""

    abort_threshold: float | None = None
    ordering: Ordering = Ordering.PROBABILITY_SWEEP

    def __post_init__(self) -> None:
        if self.abort_threshold is not None and not 0.0 < self.abort_threshold <= 1.0:
            raise ValueError("abort threshold must lie in (0, 1]")


@dataclass(frozen=True)
class Aborted:
    """The enumeration sum exceeded ``threshold``; only p > threshold is known."""

    threshold: float

    def __str__(self) -> str:
        return f"ABORTED(>{self.threshold:g})"


PValue = float | Aborted


@dataclass(frozen=True)
class ExactEnumeration:
    pvalues: Mapping[StatisticKind, PValue]
    summands: int


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def tie_thresholds(obs, out):
    for k in range(obs.shape[0]):
        out[k] = obs[k] - TIE_TOLERANCE * max(abs(obs[k]), 1.0)


@njit(cache=True)
def exact_kernel(x0_obs, x1_obs, m0, m1, m2, n1, n2, lf, active, threshold, lexicographic,
                 sums):
    """Accumulate conditional tail sums into ``sums``.

    Returns (summands visited, stopped early).  Kinds with ``active[k]`` False
    are still summed but do not hold up an early stop.
    """
    big_n = n1 + n2
    obs = np.empty(7)
    all_statistics(x0_obs, x1_obs, n1 - x0_obs - x1_obs, m0, m1, m2, n1, n2, obs)
    cut = np.empty(7)
    tie_thresholds(obs, cut)
    vals = np.empty(7)
    comp = np.zeros(7)
    for k in range(7):
        sums[k] = 0.0
    log_const = lf[m0] + lf[m1] + lf[m2] - (lf[big_n] - lf[n1] - lf[n2])
    lo = max(0, n1 - m1 - m2)
    hi = min(m0, n1)
    n_active = 0
    for k in range(7):
        if active[k]:
            n_active += 1
    n_over = 0
    over = np.zeros(7, dtype=np.bool_)
    check = threshold >= 0.0
    start = lo if lexicographic else min(max(x0_obs, lo), hi)
    summands = 0
    n_rows = hi - lo + 1
    for step in range(n_rows):
        if lexicographic:
            x0 = lo + step
        elif start + step <= hi:
            x0 = start + step
        else:
            x0 = start - (step - (hi - start))
        rest = n1 - x0
        row_const = log_const - lf[x0] - lf[m0 - x0]
        x1_lo = max(0, rest - m2)
        x1_hi = min(m1, rest)
        for x1 in range(x1_lo, x1_hi + 1):
            x2 = rest - x1
            prob = math.exp(row_const - lf[x1] - lf[m1 - x1] - lf[x2] - lf[m2 - x2])
            summands += 1
            all_statistics(x0, x1, x2, m0, m1, m2, n1, n2, vals)
            for k in range(7):
                if vals[k] >= cut[k]:
                    # Neumaier compensated summation
                    s = sums[k] + prob
                    if abs(sums[k]) >= prob:
                        comp[k] += (sums[k] - s) + prob
                    else:
                        comp[k] += (prob - s) + sums[k]
                    sums[k] = s
                    if check and active[k] and not over[k] and sums[k] + comp[k] > threshold:
                        over[k] = True
                        n_over += 1
            if check and n_over == n_active:
                for k in range(7):
                    sums[k] += comp[k]
                return summands, True
    for k in range(7):
        sums[k] = min(sums[k] + comp[k], 1.0)
    return summands, False


@njit(cache=True)
def exact_pvalues_kernel(x0, x1, m0, m1, m2, n1, n2, lf, active, threshold, lexicographic, out):
    """p-values into ``out``; -1 marks a result known only to exceed ``threshold``."""
    summands, stopped = exact_kernel(x0, x1, m0, m1, m2, n1, n2, lf, active, threshold,
                                     lexicographic, out)
    if threshold >= 0.0:
        for k in range(7):
            if stopped or out[k] > threshold:
                out[k] = _ABORTED
    return summands


@njit(parallel=True, cache=True)
def exact_batch_kernel(tables, lf, active, threshold, lexicographic, out, summands):
    for i in prange(tables.shape[0]):
        sums = np.empty(7)
        x0, x1, x2, y0, y1, y2 = (tables[i, 0], tables[i, 1], tables[i, 2],
                                  tables[i, 3], tables[i, 4], tables[i, 5])
        summands[i] = exact_pvalues_kernel(x0, x1, x0 + y0, x1 + y1, x2 + y2, x0 + x1 + x2,
                                           y0 + y1 + y2, lf, active, threshold, lexicographic,
                                           sums)
        for k in range(7):
            out[i, k] = sums[k]


@njit(cache=True)
def _count_extreme(draw_x0, draw_x1, m0, m1, m2, n1, n2, cut, counts):
    vals = np.empty(7)
    for i in range(draw_x0.shape[0]):
        x0 = draw_x0[i]
        x1 = draw_x1[i]
        all_statistics(x0, x1, n1 - x0 - x1, m0, m1, m2, n1, n2, vals)
        for k in range(7):
            if vals[k] >= cut[k]:
                counts[k] += 1


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def hypergeometric_prob(z: ContingencyTable, lf: LogFactorialTable | None = None) -> float:
    """Conditional null probability of ``z`` given its column totals."""
    m = margins_of(z)
    big_n = m.total
    if lf is None:
        lf = log_factorials(big_n)
    elif big_n > lf.n_max:
        raise ValueError(f"table total {big_n} exceeds log-factorial table size {lf.n_max}")
    v = lf.values
    log_p = (v[m.m0] - v[z.x0] - v[z.y0] + v[m.m1] - v[z.x1] - v[z.y1]
             + v[m.m2] - v[z.x2] - v[z.y2] - (v[big_n] - v[m.n1] - v[m.n2]))
    return math.exp(log_p)


def _mask(kinds) -> np.ndarray:
    mask = np.zeros(N_KINDS, dtype=np.bool_)
    for k in kinds:
        mask[int(k)] = True
    return mask


def _threshold(opts: EnumerationOptions) -> float:
    return _NO_THRESHOLD if opts.abort_threshold is None else float(opts.abort_threshold)


def _run(z: ContingencyTable, opts: EnumerationOptions, kinds) -> tuple[np.ndarray, int]:
    m = margins_of(z)
    lf = log_factorials(m.total)
    out = np.empty(N_KINDS)
    summands = exact_pvalues_kernel(z.x0, z.x1, m.m0, m.m1, m.m2, m.n1, m.n2, lf.values,
                                    _mask(kinds), _threshold(opts),
                                    opts.ordering is Ordering.LEXICOGRAPHIC, out)
    return out, int(summands)


def _wrap(p: float, opts: EnumerationOptions) -> PValue:
    if p == _ABORTED:
        return Aborted(opts.abort_threshold)
    return float(p)


def exact_p(kind: StatisticKind, z: ContingencyTable,
            opts: EnumerationOptions = EnumerationOptions()) -> PValue:
    kind = StatisticKind(kind)
    out, _ = _run(z, opts, [kind])
    return _wrap(out[kind], opts)


def enumerate_exact(z: ContingencyTable,
                    opts: EnumerationOptions = EnumerationOptions()) -> ExactEnumeration:
    """All seven exact p-values from one pass, with the number of tables visited."""
    out, summands = _run(z, opts, ALL_KINDS)
    return ExactEnumeration({k: _wrap(out[k], opts) for k in ALL_KINDS}, summands)


def exact_p_all(z: ContingencyTable,
                opts: EnumerationOptions = EnumerationOptions()) -> dict[StatisticKind, PValue]:
    return dict(enumerate_exact(z, opts).pvalues)


def exact_p_batch(tables: np.ndarray, opts: EnumerationOptions = EnumerationOptions(),
                  threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exact p-values for rows ``x0,x1,x2,y0,y1,y2`` of an integer array.

    Rows are processed in parallel over ``threads`` workers; the result does
    not depend on the worker count.  Returns (pvalues, summands); an aborted
    entry is nan in ``pvalues``.
    """
    tables = np.ascontiguousarray(tables, dtype=np.int64)
    if tables.ndim != 2 or tables.shape[1] != 6:
        raise ValueError("tables must have shape (k, 6)")
    lf = log_factorials(int(tables.sum(axis=1).max()) if len(tables) else 1)
    out = np.empty((tables.shape[0], N_KINDS))
    summands = np.zeros(tables.shape[0], dtype=np.int64)
    previous = numba.get_num_threads()
    if threads:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    try:
        exact_batch_kernel(tables, lf.values, _mask(ALL_KINDS), _threshold(opts),
                           opts.ordering is Ordering.LEXICOGRAPHIC, out, summands)
    finally:
        numba.set_num_threads(previous)
    out[out == _ABORTED] = np.nan
    return out, summands


def permutation_counts(z: ContingencyTable, b: int, seed: int) -> np.ndarray:
    """Number of ``b`` permuted tables at least as extreme as ``z``, per statistic.

    Shuffling genotypes against fixed disease labels is the same as drawing the
    case counts from the trivariate hypergeometric law, which is what we do.
    """
    if b < 1:
        raise ValueError("b must be at least 1")
    m = margins_of(z)
    rng = np.random.default_rng(seed)
    x0 = rng.hypergeometric(m.m0, m.m1 + m.m2, m.n1, size=b).astype(np.int64)
    rest = m.n1 - x0
    if m.m1 + m.m2 > 0:
        x1 = rng.hypergeometric(m.m1, m.m2, rest).astype(np.int64)
    else:
        x1 = np.zeros(b, dtype=np.int64)
    obs = np.empty(N_KINDS)
    all_statistics(z.x0, z.x1, z.x2, m.m0, m.m1, m.m2, m.n1, m.n2, obs)
    cut = np.empty(N_KINDS)
    tie_thresholds(obs, cut)
    counts = np.zeros(N_KINDS, dtype=np.int64)
    _count_extreme(x0, x1, m.m0, m.m1, m.m2, m.n1, m.n2, cut, counts)
    return counts


def permutation_p(kind: StatisticKind, z: ContingencyTable, b: int, seed: int) -> float:
    """(1 + #permuted tables at least as extreme) / (b + 1)."""
    counts = permutation_counts(z, b, seed)
    return (1.0 + counts[int(StatisticKind(kind))]) / (b + 1.0)
