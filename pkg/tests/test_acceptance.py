"""Acceptance criteria, one test per criterion.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers.
Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from numba import njit
from scipy import optimize

sys.path.insert(0, str(Path(__file__).parent))

from genassoc.asymptotic import GenotypeFreqEstimate, p_cmax, p_max3, p_min2  # noqa: E402
from genassoc.cli import main as cli_main  # noqa: E402
from genassoc.exact import (  # noqa: E402
    EnumerationOptions,
    Ordering,
    exact_p_all,
    exact_p_batch,
    permutation_counts,
)
from genassoc.genetics import GeneticModelSpec, theta_from_model  # noqa: E402
from genassoc.simulation import StudyDesign, draw_tables, estimate_power  # noqa: E402
from genassoc.statistics import StatisticKind  # noqa: E402
from genassoc.tables import ContingencyTable  # noqa: E402
from oracles import (  # noqa: E402
    KINDS,
    mc_standard_error,
    monte_carlo_tails,
    naive_statistic,
)

_PRINT = print


@pytest.fixture
def say(capsys):
    def emit(ok: bool, criterion: int, detail: str) -> None:
        with capsys.disabled():
            _PRINT(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    return emit


# --------------------------------------------------------------------------
# 1. maximum number of tables
# --------------------------------------------------------------------------

MAX_COUNTS = {(500, 500): 83834, (500, 1000): 125751, (1000, 1000): 334334,
          (1000, 2000): 501501, (5000, 5000): 8338334, (5000, 10000): 12507501}


def test_criterion_1_maxcount(say):
    start = time.perf_counter()
    got = {}
    for (n1, n2) in MAX_COUNTS:
        out = io.StringIO()
        assert cli_main(["maxcount", str(n1), str(n2)], out, io.StringIO()) == 0
        got[(n1, n2)] = int(out.getvalue())
    elapsed = time.perf_counter() - start
    ok = got == MAX_COUNTS and elapsed < 10.0
    say(ok, 1, f"maxcount {list(got.values())} in {elapsed:.2f} s (limit 10 s)")
    assert got == MAX_COUNTS
    assert elapsed < 10.0


# --------------------------------------------------------------------------
# 2. brute-force oracle for every margin set with N <= 14
# --------------------------------------------------------------------------


def _all_tables(n_max):
    """Every table with 2 <= N <= n_max and both rows non-empty, grouped by margins."""
    groups = {}
    for big_n in range(2, n_max + 1):
        for n1 in range(1, big_n):
            for m0 in range(big_n + 1):
                for m1 in range(big_n - m0 + 1):
                    m2 = big_n - m0 - m1
                    rows = []
                    for x0 in range(max(0, n1 - m1 - m2), min(m0, n1) + 1):
                        for x1 in range(max(0, n1 - x0 - m2), min(m1, n1 - x0) + 1):
                            x2 = n1 - x0 - x1
                            rows.append((x0, x1, x2, m0 - x0, m1 - x1, m2 - x2))
                    groups[(m0, m1, m2, n1)] = rows
    return groups


def test_criterion_2_oracle_equivalence(say):
    start = time.perf_counter()
    groups = _all_tables(14)
    worst = 0.0
    n_tables = 0
    for (m0, m1, m2, n1), rows in groups.items():
        denom = math.comb(m0 + m1 + m2, n1)
        weights = [math.comb(m0, r[0]) * math.comb(m1, r[1]) * math.comb(m2, r[2]) for r in rows]
        naive = [[naive_statistic(k, r[:3], r[3:])[0] for k in KINDS] for r in rows]
        naive = np.array(naive)
        for i, r in enumerate(rows):
            got = exact_p_all(ContingencyTable(*r))
            for j, name in enumerate(KINDS):
                obs = naive[i, j]
                tol = 1e-9 * max(abs(obs), 1.0)
                if name == "MIN2":
                    mask = naive[:, j] <= obs + tol
                else:
                    mask = naive[:, j] >= obs - tol
                want = sum(w for w, m in zip(weights, mask) if m) / denom
                worst = max(worst, abs(got[StatisticKind(j)] - want))
        n_tables += len(rows)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 60
    say(ok, 2, f"{len(groups)} margin sets, {n_tables} tables, max |diff| {worst:.2e} "
               f"(limit 1e-10) in {elapsed:.1f} s (limit 60 s)")
    assert worst <= 1e-10
    assert elapsed < 60


# --------------------------------------------------------------------------
# 3. validity for every margin set with N <= 30
# --------------------------------------------------------------------------


@njit(cache=True)
def _count_all(n_max):
    n_groups = 0
    n_rows = 0
    for big_n in range(2, n_max + 1):
        for n1 in range(1, big_n):
            for m0 in range(big_n + 1):
                for m1 in range(big_n - m0 + 1):
                    m2 = big_n - m0 - m1
                    n_groups += 1
                    for x0 in range(max(0, n1 - m1 - m2), min(m0, n1) + 1):
                        n_rows += min(m1, n1 - x0) - max(0, n1 - x0 - m2) + 1
    return n_groups, n_rows


@njit(cache=True)
def _comb(n, k):
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


@njit(cache=True)
def _fill_all(n_max, tables, weights, group_start, group_denom):
    g = 0
    r = 0
    for big_n in range(2, n_max + 1):
        for n1 in range(1, big_n):
            for m0 in range(big_n + 1):
                for m1 in range(big_n - m0 + 1):
                    m2 = big_n - m0 - m1
                    group_start[g] = r
                    group_denom[g] = _comb(big_n, n1)
                    g += 1
                    for x0 in range(max(0, n1 - m1 - m2), min(m0, n1) + 1):
                        for x1 in range(max(0, n1 - x0 - m2), min(m1, n1 - x0) + 1):
                            x2 = n1 - x0 - x1
                            tables[r, 0] = x0
                            tables[r, 1] = x1
                            tables[r, 2] = x2
                            tables[r, 3] = m0 - x0
                            tables[r, 4] = m1 - x1
                            tables[r, 5] = m2 - x2
                            weights[r] = _comb(m0, x0) * _comb(m1, x1) * _comb(m2, x2)
                            r += 1


def test_criterion_3_validity(say):
    start = time.perf_counter()
    n_groups, n_rows = _count_all(30)
    tables = np.empty((n_rows, 6), dtype=np.int64)
    weights = np.empty(n_rows, dtype=np.int64)
    starts = np.empty(n_groups, dtype=np.int64)
    denoms = np.empty(n_groups, dtype=np.int64)
    _fill_all(30, tables, weights, starts, denoms)
    # the conditional probabilities of each margin set add up exactly
    assert np.array_equal(np.add.reduceat(weights, starts), denoms)
    pvals, _ = exact_p_batch(tables, EnumerationOptions())
    violations = []
    worst = 0.0
    for alpha, permille in ((0.05, 50), (0.01, 10), (0.001, 1)):
        for k in StatisticKind:
            rejected = np.add.reduceat(np.where(pvals[:, k] <= alpha, weights, 0), starts)
            # exact integer comparison rejected / denom <= permille / 1000
            bad = rejected * 1000 > permille * denoms
            worst = max(worst, float(np.max(rejected / denoms)) / alpha)
            if bad.any():
                violations.append((k.label, alpha, int(bad.sum())))
    elapsed = time.perf_counter() - start
    ok = not violations
    say(ok, 3, f"{n_groups} margin sets, {n_rows} tables, 7 statistics x 3 levels; "
               f"largest size/alpha {worst:.4f}; violations {violations or 'none'} "
               f"({elapsed:.1f} s)")
    assert not violations


# --------------------------------------------------------------------------
# 4. scaled null test sizes at (500, 500), alpha = 0.05
# --------------------------------------------------------------------------

# published scaled sizes (asymptotic, conditional) and their quoted 95% half-length
REFERENCE_NULL_SIZES = {
    StatisticKind.CATT_HALF: (5.00, 4.21), StatisticKind.PEARSON: (4.78, 4.91),
    StatisticKind.MIN2: (4.77, 4.66), StatisticKind.MAX3: (4.75, 4.14),
    StatisticKind.CMAX: (4.62, 4.73), StatisticKind.CLRT: (5.43, 4.55),
    StatisticKind.MERT: (4.93, 4.81),
}
REFERENCE_HALF_LENGTH = 6.8e-6


def test_criterion_4_null_sizes(say):
    alpha = 0.05
    b = 1_000_000
    start = time.perf_counter()
    est = estimate_power(StudyDesign(500, 500, GeneticModelSpec(0.1, 0.1, 0.0, 1.0), b,
                                     (alpha,), seed=2024))
    elapsed = time.perf_counter() - start
    misses = []
    cells = []
    for kind, reference in REFERENCE_NULL_SIZES.items():
        for method, target in zip(("ASYMPTOTIC", "EXACT"), reference):
            rec = est.record(kind, method, alpha)
            tol = 3 * (rec.ci_half + REFERENCE_HALF_LENGTH) * 5 / alpha
            cells.append(f"{kind.label}/{method[0]} {rec.scaled:.2f}~{target:.2f}")
            if abs(rec.scaled - target) > tol:
                misses.append(f"{kind.label}/{method[0]} {rec.scaled:.3f} vs {target} "
                              f"(tol {tol:.3f})")
    say(not misses, 4, f"b={b} in {elapsed:.0f} s; " + ", ".join(cells)
        + (f"; outside tolerance: {misses}" if misses else ""))
    assert not misses


# --------------------------------------------------------------------------
# 5. power at (500, 500), semi-dominant, lambda2 = 1.5, alpha = 5e-5
# --------------------------------------------------------------------------


def test_criterion_5_power_cell(say):
    alpha = 5e-5
    b = 1_000_000
    start = time.perf_counter()
    est = estimate_power(StudyDesign(500, 500, GeneticModelSpec(0.1, 0.1, 0.75, 1.5), b,
                                     (alpha,), seed=2025))
    elapsed = time.perf_counter() - start
    targets = [(StatisticKind.CATT_HALF, "ASYMPTOTIC", 3.9),
               (StatisticKind.CATT_HALF, "EXACT", 3.5),
               (StatisticKind.MAX3, "EXACT", 3.9)]
    misses = []
    cells = []
    for kind, method, target in targets:
        pct = 100 * est.power(kind, method, alpha)
        cells.append(f"{kind.label}/{method[0]} {pct:.2f}% ~ {target}%")
        if abs(pct - target) > 0.15:
            misses.append(cells[-1])
    say(not misses, 5, f"b={b} in {elapsed:.0f} s; " + ", ".join(cells) + " (limit 0.15 pp)")
    assert not misses


# --------------------------------------------------------------------------
# 6. asymptotic integrals against Monte Carlo
# --------------------------------------------------------------------------

P_TARGETS = (0.5, 0.1, 1e-2, 1e-3, 1e-4)


def _threshold_for(f, p, lo, hi):
    return optimize.brentq(lambda t: f(t) - p, lo, hi, xtol=1e-12)


def test_criterion_6_asymptotic_vs_monte_carlo(say):
    n = 100_000_000
    start = time.perf_counter()
    worst = 0.0
    misses = []
    for g0, g2 in ((0.81, 0.01), (1 / 3, 1 / 3)):
        g = GenotypeFreqEstimate(g0, 1 - g0 - g2, g2)
        t_max3 = [_threshold_for(lambda t: p_max3(t, g), p, 0.0, 10.0) for p in P_TARGETS]
        t_cmax = [_threshold_for(lambda t: p_cmax(t, g), p, 0.0, 60.0) for p in P_TARGETS]
        t_min2 = [_threshold_for(p_min2, p, 1e-12, 1.0) for p in P_TARGETS]
        mc = monte_carlo_tails(g0, g2, t_max3, t_cmax, t_min2, n, seed=7)
        for name, ts, f, est in (("MAX3", t_max3, lambda t: p_max3(t, g), mc[0]),
                                 ("CMAX", t_cmax, lambda t: p_cmax(t, g), mc[1]),
                                 ("MIN2", t_min2, p_min2, mc[2])):
            for t, e in zip(ts, est):
                p = f(t)
                z = abs(p - e) / mc_standard_error(p, n)
                worst = max(worst, z)
                if z > 3:
                    misses.append(f"{name} rho={g.rho:.4f} t={t:.4g} p={p:.4g} mc={e:.4g}")
    elapsed = time.perf_counter() - start
    say(not misses, 6, f"{n:.0e} draws per rho, 30 comparisons, largest |z| {worst:.2f} "
                       f"(limit 3) in {elapsed:.0f} s" + (f"; misses {misses}" if misses else ""))
    assert not misses


# --------------------------------------------------------------------------
# 7. permutation p-values converge to the exact ones
# --------------------------------------------------------------------------


def _random_tables(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        big_n = int(rng.integers(20, 201))
        n1 = int(rng.integers(5, big_n - 4))
        maf = rng.uniform(0.1, 0.5)
        g = np.array([(1 - maf) ** 2, 2 * maf * (1 - maf), maf ** 2])
        shift = rng.uniform(0.7, 1.4, size=3)
        cases = rng.multinomial(n1, g * shift / (g * shift).sum())
        controls = rng.multinomial(big_n - n1, g)
        out.append(ContingencyTable(*map(int, cases), *map(int, controls)))
    return out


def test_criterion_7_permutation(say):
    b = 1_000_000
    start = time.perf_counter()
    worst = 0.0
    misses = []
    for i, z in enumerate(_random_tables(20, seed=77)):
        counts = permutation_counts(z, b, seed=1000 + i)
        exact = exact_p_all(z)
        for kind in StatisticKind:
            p = exact[kind]
            se = math.sqrt(max(p * (1 - p), 1e-300) / b)
            zscore = abs(counts[kind] / b - p) / se
            worst = max(worst, zscore)
            if zscore > 3:
                misses.append(f"{z} {kind.label}: {counts[kind] / b:.5g} vs {p:.5g}")
    elapsed = time.perf_counter() - start
    say(not misses, 7, f"20 tables x 7 statistics, b={b}, largest |z| {worst:.2f} (limit 3) "
                       f"in {elapsed:.0f} s" + (f"; misses {misses}" if misses else ""))
    assert not misses


# --------------------------------------------------------------------------
# 8. early abort and probability sweep
# --------------------------------------------------------------------------


def test_criterion_8_abort_metamorphic(say):
    theta = theta_from_model(GeneticModelSpec(0.1, 0.1, 0.0, 1.0))
    tables = draw_tables(theta, 1000, 1000, seed=88, start=0, count=10_000)
    sweep_opts = EnumerationOptions(0.05, Ordering.PROBABILITY_SWEEP)
    lex_abort = EnumerationOptions(0.05, Ordering.LEXICOGRAPHIC)
    full_lex = EnumerationOptions(None, Ordering.LEXICOGRAPHIC)

    exact_p_batch(tables[:10], sweep_opts)  # compile outside the timing
    start = time.perf_counter()
    exact_p_batch(tables[:1000], sweep_opts)
    t1000 = time.perf_counter() - start

    p_sweep, s_sweep = exact_p_batch(tables, sweep_opts)
    _, s_lex_abort = exact_p_batch(tables, lex_abort)
    p_full, s_full = exact_p_batch(tables, full_lex)
    aborted = np.isnan(p_sweep)
    # an aborted entry certifies p > 0.05; a finished one must reproduce the full sum
    decisions_sweep = np.where(aborted, False, p_sweep <= 0.05)
    decisions_full = p_full <= 0.05
    agree = bool(np.array_equal(decisions_sweep, decisions_full))
    consistent = bool(np.all(p_full[aborted] > 0.05))
    finished = ~aborted
    close = bool(np.allclose(p_sweep[finished], p_full[finished], rtol=1e-10, atol=1e-15))
    any_abort = aborted.any(axis=1)
    frac_vs_lex = float(np.mean(s_sweep[any_abort] <= s_lex_abort[any_abort]))
    frac_vs_full = float(np.mean(s_sweep[any_abort] <= s_full[any_abort]))
    ok = agree and consistent and close and frac_vs_full >= 0.99 and t1000 <= 20.0
    say(ok, 8, f"decisions identical: {agree and consistent and close}; "
               f"{int(any_abort.sum())} aborting tables, sweep summands <= full lexicographic "
               f"sum in {100 * frac_vs_full:.2f}% (limit 99%; <= lexicographic with the same "
               f"abort in {100 * frac_vs_lex:.2f}%), "
               f"mean summands {s_sweep.mean():.0f} vs {s_full.mean():.0f}; "
               f"1000 tables in {t1000:.2f} s (limit 20 s)")
    assert agree and consistent and close
    assert frac_vs_full >= 0.99
    assert t1000 <= 20.0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
