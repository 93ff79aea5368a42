"""Monte Carlo test size and power, and brute-force exact power for tiny designs.

Every replicate draws its table from its own Philox block keyed by
(seed, replicate index), scores all seven statistics asymptotically and by
exact enumeration, and adds to integer hit counters.  Replicates are split
into fixed chunks processed in parallel; the per-chunk counters are summed
afterwards, so results do not depend on the thread count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numba
import numpy as np
from numba import njit, prange

from .asymptotic import DEFAULT_QUADRATURE, QuadratureSpec, asymptotic_p_kernel
from .exact import log_factorials, exact_pvalues_kernel
from .genetics import GeneticModelSpec, PopulationParams, theta_from_model
from .rng import replicate_uniforms, trinomial_from_uniforms
from .statistics import ALL_KINDS, N_KINDS, StatisticKind, all_statistics
from .tables import ContingencyTable

METHODS = ("ASYMPTOTIC", "EXACT")
TABLE_STREAM = 0
CHUNK = 4096
EXACT_POWER_CAP = 40


class CapExceededError(ValueError):
    """The design is too large for enumerating every outcome."""


@dataclass(frozen=True)
class StudyDesign:
    n1: int
    n2: int
    spec: GeneticModelSpec
    replicates: int
    alphas: tuple[float, ...]
    seed: int = 0
    abort_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be positive")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        alphas = tuple(sorted({float(a) for a in self.alphas}, reverse=True))
        if not alphas or not all(0.0 < a < 1.0 for a in alphas):
            raise ValueError("significance levels must lie in (0, 1)")
        object.__setattr__(self, "alphas", alphas)
        if self.abort_threshold is not None and self.abort_threshold < alphas[0]:
            raise ValueError("abort threshold must be at least the largest alpha")

    @property
    def threshold(self) -> float:
        return self.alphas[0] if self.abort_threshold is None else self.abort_threshold


@dataclass(frozen=True)
class PowerRecord:
    kind: StatisticKind
    method: str
    alpha: float
    hits: int
    b: int

    @property
    def power(self) -> float:
        return self.hits / self.b

    @property
    def ci_half(self) -> float:
        g = self.power
        return 1.96 * math.sqrt(g * (1.0 - g) / self.b)

    @property
    def scaled(self) -> float:
        """Size multiplied by 5/alpha, so an exact-size test reads 5.00."""
        return self.power * 5.0 / self.alpha


@dataclass
class PowerEstimate:
    design: StudyDesign
    hits: np.ndarray = field(repr=False)  # (kind, method, alpha)

    @property
    def b(self) -> int:
        return self.design.replicates

    def record(self, kind: StatisticKind, method: str, alpha: float) -> PowerRecord:
        j = self.design.alphas.index(float(alpha))
        return PowerRecord(StatisticKind(kind), method, float(alpha),
                           int(self.hits[int(kind), METHODS.index(method), j]), self.b)

    def power(self, kind: StatisticKind, method: str, alpha: float) -> float:
        return self.record(kind, method, alpha).power

    def records(self) -> Iterator[PowerRecord]:
        for kind in ALL_KINDS:
            for method in METHODS:
                for alpha in self.design.alphas:
                    yield self.record(kind, method, alpha)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit(cache=True)
def draw_table_kernel(seed, index, cases, controls, n1, n2, lf, u, out):
    replicate_uniforms(seed, TABLE_STREAM, index, u)
    x0, x1, x2 = trinomial_from_uniforms(n1, cases[0], cases[1], cases[2], u[0], u[1], lf)
    y0, y1, y2 = trinomial_from_uniforms(n2, controls[0], controls[1], controls[2], u[2], u[3],
                                         lf)
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = y0
    out[4] = y1
    out[5] = y2


@njit(cache=True)
def _draw_many(seed, start, count, cases, controls, n1, n2, lf, out):
    u = np.empty(4)
    row = np.empty(6, dtype=np.int64)
    for i in range(count):
        draw_table_kernel(seed, start + i, cases, controls, n1, n2, lf, u, row)
        for j in range(6):
            out[i, j] = row[j]


@njit(cache=True)
def _replicate_range(seed, start, stop, cases, controls, n1, n2, lf, alphas, threshold,
                     rel_tol, abs_tol, max_sub, hits):
    u = np.empty(4)
    row = np.empty(6, dtype=np.int64)
    ordering = np.empty(7)
    p_exact = np.empty(7)
    active = np.ones(7, dtype=np.bool_)
    n_alpha = alphas.shape[0]
    for idx in range(start, stop):
        draw_table_kernel(seed, idx, cases, controls, n1, n2, lf, u, row)
        x0, x1, x2 = row[0], row[1], row[2]
        m0, m1, m2 = x0 + row[3], x1 + row[4], x2 + row[5]
        all_statistics(x0, x1, x2, m0, m1, m2, n1, n2, ordering)
        for k in range(7):
            pa = asymptotic_p_kernel(k, ordering[k], m0, m1, m2, rel_tol, abs_tol, max_sub)
            # nan (degenerate margins) never rejects
            for j in range(n_alpha):
                if pa <= alphas[j]:
                    hits[k, 0, j] += 1
        exact_pvalues_kernel(x0, x1, m0, m1, m2, n1, n2, lf, active, threshold, False, p_exact)
        for k in range(7):
            pe = p_exact[k]
            if pe < 0.0:
                continue  # aborted: p above every alpha
            for j in range(n_alpha):
                if pe <= alphas[j]:
                    hits[k, 1, j] += 1


@njit(parallel=True, cache=True)
def _simulate(seed, b, cases, controls, n1, n2, lf, alphas, threshold, rel_tol, abs_tol,
              max_sub, chunk):
    n_chunks = (b + chunk - 1) // chunk
    per_chunk = np.zeros((n_chunks, 7, 2, alphas.shape[0]), dtype=np.int64)
    for c in prange(n_chunks):
        start = c * chunk
        stop = min(b, start + chunk)
        _replicate_range(seed, start, stop, cases, controls, n1, n2, lf, alphas, threshold,
                         rel_tol, abs_tol, max_sub, per_chunk[c])
    return per_chunk.sum(axis=0)


@njit(cache=True)
def _trinomial_logpmf(n, c0, c1, c2, p0, p1, p2, lf):
    out = lf[n] - lf[c0] - lf[c1] - lf[c2]
    for c, p in ((c0, p0), (c1, p1), (c2, p2)):
        if c > 0:
            if p <= 0.0:
                return -np.inf
            out += c * math.log(p)
    return out


@njit(cache=True)
def _exact_power_kernel(cases, controls, n1, n2, kind, alpha, lf):
    active = np.zeros(7, dtype=np.bool_)
    active[kind] = True
    pvals = np.empty(7)
    total = 0.0
    for x0 in range(n1 + 1):
        for x1 in range(n1 - x0 + 1):
            x2 = n1 - x0 - x1
            lx = _trinomial_logpmf(n1, x0, x1, x2, cases[0], cases[1], cases[2], lf)
            if lx == -np.inf:
                continue
            for y0 in range(n2 + 1):
                for y1 in range(n2 - y0 + 1):
                    y2 = n2 - y0 - y1
                    ly = _trinomial_logpmf(n2, y0, y1, y2, controls[0], controls[1],
                                           controls[2], lf)
                    if ly == -np.inf:
                        continue
                    exact_pvalues_kernel(x0, x1, x0 + y0, x1 + y1, x2 + y2, n1, n2, lf,
                                         active, alpha, False, pvals)
                    p = pvals[kind]
                    if p >= 0.0 and p <= alpha:
                        total += math.exp(lx + ly)
    return total


# --------------------------------------------------------------------------
# public API
# --------------------------------------------------------------------------


def default_threads() -> int:
    env = os.environ.get("GENASSOC_THREADS")
    if env:
        return max(1, int(env))
    return numba.config.NUMBA_NUM_THREADS


def draw_table(theta: PopulationParams, n1: int, n2: int, seed: int, index: int
               ) -> ContingencyTable:
    """Replicate ``index`` of the table stream keyed by ``seed``."""
    return ContingencyTable(*(int(v) for v in draw_tables(theta, n1, n2, seed, index, 1)[0]))


def draw_tables(theta: PopulationParams, n1: int, n2: int, seed: int, start: int, count: int
                ) -> np.ndarray:
    """Replicates ``start .. start+count-1`` as a (count, 6) integer array."""
    lf = log_factorials(n1 + n2)
    out = np.empty((count, 6), dtype=np.int64)
    _draw_many(seed, start, count, np.array(theta.cases), np.array(theta.controls), n1, n2,
               lf.values, out)
    return out


def estimate_power(design: StudyDesign, threads: int | None = None,
                   quad: QuadratureSpec = DEFAULT_QUADRATURE) -> PowerEstimate:
    """Rejection rates of all seven statistics, asymptotic and exact, at every alpha."""
    theta = theta_from_model(design.spec)
    lf = log_factorials(design.n1 + design.n2)
    previous = numba.get_num_threads()
    numba.set_num_threads(min(threads or default_threads(), numba.config.NUMBA_NUM_THREADS))
    try:
        hits = _simulate(design.seed, design.replicates, np.array(theta.cases),
                         np.array(theta.controls), design.n1, design.n2, lf.values,
                         np.array(design.alphas), float(design.threshold),
                         quad.relative_tolerance, quad.absolute_tolerance,
                         quad.max_subdivisions, CHUNK)
    finally:
        numba.set_num_threads(previous)
    return PowerEstimate(design, hits)


def exact_power(theta: PopulationParams, n1: int, n2: int, kind: StatisticKind,
                alpha: float) -> float:
    """Rejection probability at ``theta``, summed over every possible outcome."""
    if n1 + n2 > EXACT_POWER_CAP:
        raise CapExceededError(f"n1 + n2 = {n1 + n2} exceeds the cap of {EXACT_POWER_CAP}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    lf = log_factorials(n1 + n2)
    return float(_exact_power_kernel(np.array(theta.cases), np.array(theta.controls), n1, n2,
                                     int(StatisticKind(kind)), float(alpha), lf.values))


def scaled_sizes(estimate: PowerEstimate, alpha: float) -> dict[tuple[StatisticKind, str], float]:
    return {(r.kind, r.method): r.scaled for r in estimate.records() if r.alpha == alpha}


def design_grid(pairs: Sequence[tuple[int, int]], deltas: Sequence[float],
                lambdas: Sequence[float], k: float, maf: float, replicates: int,
                alphas: Sequence[float], seed: int) -> Iterator[StudyDesign]:
    for n1, n2 in pairs:
        for lam in lambdas:
            for delta in ([0.0] if lam == 1.0 else deltas):
                yield StudyDesign(n1, n2, GeneticModelSpec(k, maf, delta, lam), replicates,
                                  tuple(alphas), seed)
