"""Per-table reports combining statistics, asymptotic and exact p-values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asymptotic import DegenerateFrequenciesError, asymptotic_p
from .exact import Aborted, EnumerationOptions, PValue, exact_p_batch, exact_p_all
from .statistics import StatisticKind, statistic
from .tables import ContingencyTable

METHOD_CHOICES = ("asymptotic", "exact", "both")


def format_number(x: float) -> str:
    """Six significant digits; scientific notation below 1e-4."""
    if x != 0.0 and abs(x) < 1e-4:
        return f"{x:.5e}"
    return f"{x:.6g}"


def format_p(p: PValue | None | str) -> str:
    if p is None:
        return "-"
    if isinstance(p, (Aborted, str)):
        return str(p)
    return format_number(p)


@dataclass(frozen=True)
class ReportRow:
    kind: StatisticKind
    value: float
    asymptotic: float | str | None
    exact: PValue | None


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    table: ContingencyTable
    rows: tuple[ReportRow, ...]

    def lines(self) -> list[str]:
        out = ["statistic\tvalue\tasymptotic_p\texact_p"]
        for r in self.rows:
            out.append("\t".join([r.kind.label, format_number(r.value), format_p(r.asymptotic),
                                  format_p(r.exact)]))
        return out


def _asymptotic_or_note(kind: StatisticKind, table: ContingencyTable) -> float | str:
    try:
        return asymptotic_p(kind, table)
    except DegenerateFrequenciesError:
        return "DEGENERATE_FREQS"


def build_report(table: ContingencyTable, kinds: Sequence[StatisticKind], method: str,
                 opts: EnumerationOptions, exact: dict | None = None) -> TestReport:
    if method not in METHOD_CHOICES:
        raise ValueError(f"method must be one of {METHOD_CHOICES}")
    want_asym = method in ("asymptotic", "both")
    want_exact = method in ("exact", "both")
    if want_exact and exact is None:
        exact = exact_p_all(table, opts)
    rows = []
    for kind in kinds:
        rows.append(ReportRow(
            kind,
            statistic(kind, table).value,
            _asymptotic_or_note(kind, table) if want_asym else None,
            exact[kind] if want_exact else None,
        ))
    return TestReport(table, tuple(rows))


def build_reports(tables: Sequence[ContingencyTable], kinds: Sequence[StatisticKind],
                  method: str, opts: EnumerationOptions, threads: int | None = None,
                  ) -> list[TestReport]:
    """Reports for many tables; the exact enumerations run as one parallel batch."""
    exact_maps: list[dict | None] = [None] * len(tables)
    if method in ("exact", "both") and tables:
        arr = np.array([t.counts for t in tables], dtype=np.int64)
        pvals, _ = exact_p_batch(arr, opts, threads)
        for i in range(len(tables)):
            exact_maps[i] = {
                k: (Aborted(opts.abort_threshold) if np.isnan(pvals[i, k]) else float(pvals[i, k]))
                for k in StatisticKind
            }
    return [build_report(t, kinds, method, opts, e) for t, e in zip(tables, exact_maps)]
