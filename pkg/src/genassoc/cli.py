"""Command-line front end.

Subcommands::

    test TABLE            statistics and p-values for one table x0,x1,x2,y0,y1,y2
    batch FILE            the same for every line of a CSV file, one TSV row per table
    size CONFIG           Monte Carlo test size over a config-driven grid
    power CONFIG          Monte Carlo power over a config-driven grid
    maxcount N1 N2        largest number of tables sharing margins with row totals N1, N2
    enumerate M0,M1,M2    every table with the given column totals and --n1 cases

Exit codes: 0 success, 1 partial failure (batch, infeasible grid cells),
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence, TextIO

from .exact import EnumerationOptions, hypergeometric_prob, log_factorials
from .genetics import GeneticModelSpec, PenetranceOverflowError, theta_from_model
from .report import METHOD_CHOICES, build_reports, format_number, format_p
from .simulation import StudyDesign, default_threads, estimate_power
from .statistics import ALL_KINDS, StatisticKind
from .tables import ContingencyTable, Margins, enumerate_tables, is_header, max_summands

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad arguments or unparsable input; maps to exit code 2."""


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------


def parse_kinds(text: str) -> tuple[StatisticKind, ...]:
    if text.strip().lower() == "all":
        return ALL_KINDS
    try:
        kinds = [StatisticKind.parse(name) for name in text.split(",") if name.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not kinds:
        raise UsageError("empty statistic list")
    return tuple(dict.fromkeys(kinds))


def enumeration_options(args: argparse.Namespace) -> EnumerationOptions:
    if args.no_abort or args.abort_threshold is None:
        return EnumerationOptions()
    try:
        return EnumerationOptions(abort_threshold=args.abort_threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# study configuration
# --------------------------------------------------------------------------


@dataclass
class StudyConfig:
    """Grid of designs and genetic models for ``size`` and ``power``.

    The file format is flat ``key = value`` lines with comma-separated lists;
    ``#`` starts a comment.  Keys: designs (``500x500,1000x1000``), deltas,
    lambda2, k, maf, alphas, replicates, seed, output, abort_threshold.
    """

    designs: list[tuple[int, int]] = field(default_factory=lambda: [(500, 500)])
    deltas: list[float] = field(default_factory=lambda: [0.0])
    lambda2: list[float] = field(default_factory=lambda: [1.0])
    k: float = 0.1
    maf: float = 0.1
    alphas: list[float] = field(default_factory=lambda: [0.05])
    replicates: int = 10_000
    seed: int = 0
    output: str | None = None
    abort_threshold: float | None = None

    KEYS = ("designs", "deltas", "lambda2", "k", "maf", "alphas", "replicates", "seed",
            "output", "abort_threshold")

    @classmethod
    def parse(cls, text: str) -> StudyConfig:
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                cfg.set(key, value)
            except UsageError as exc:
                raise UsageError(f"config line {lineno}: {exc}") from None
        cfg.validate()
        return cfg

    def set(self, key: str, value: str) -> None:
        key = key.strip().lower().replace("-", "_")
        if key not in self.KEYS:
            raise UsageError(f"unknown config key {key!r}")
        try:
            if key == "designs":
                pairs = []
                for item in value.split(","):
                    a, b = item.lower().split("x")
                    pairs.append((int(a), int(b)))
                self.designs = pairs
            elif key in ("deltas", "lambda2", "alphas"):
                setattr(self, key, [float(v) for v in value.split(",")])
            elif key in ("k", "maf"):
                setattr(self, key, float(value))
            elif key in ("replicates", "seed"):
                setattr(self, key, int(float(value)) if key == "replicates" else int(value))
            elif key == "output":
                self.output = value or None
            else:
                self.abort_threshold = None if value.lower() in ("", "none") else float(value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None

    def validate(self) -> None:
        if not self.designs or any(a < 1 or b < 1 for a, b in self.designs):
            raise UsageError("designs must be positive n1xn2 pairs")
        if self.replicates < 1:
            raise UsageError("replicates must be positive")
        if not self.alphas or not all(0.0 < a < 1.0 for a in self.alphas):
            raise UsageError("alphas must lie in (0, 1)")
        if not 0.0 < self.k < 1.0 or not 0.0 < self.maf < 1.0:
            raise UsageError("k and maf must lie in (0, 1)")
        if any(not 0.0 <= d <= 1.0 for d in self.deltas):
            raise UsageError("deltas must lie in [0, 1]")
        if any(lam < 1.0 for lam in self.lambda2):
            raise UsageError("lambda2 values must be at least 1")
        if self.abort_threshold is not None and not max(self.alphas) <= self.abort_threshold <= 1:
            raise UsageError("abort_threshold must lie in [max(alphas), 1]")

    def cells(self) -> list[tuple[int, int, float, float]]:
        out = []
        for n1, n2 in self.designs:
            for lam in self.lambda2:
                for delta in ([0.0] if lam == 1.0 else self.deltas):
                    out.append((n1, n2, delta, lam))
        return out


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_test(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    try:
        table = ContingencyTable.parse(args.table)
    except ValueError as exc:
        raise UsageError(f"cannot parse table: {exc}") from None
    kinds = parse_kinds(args.stats)
    report = build_reports([table], kinds, args.method, enumeration_options(args))[0]
    out.write("\n".join(report.lines()) + "\n")
    return EXIT_OK


def cmd_batch(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    kinds = parse_kinds(args.stats)
    opts = enumeration_options(args)
    try:
        with open(args.file, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    tables: list[ContingencyTable] = []
    failed = False
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#") or is_header(line):
            continue
        try:
            tables.append(ContingencyTable.parse(line))
        except ValueError as exc:
            err.write(f"{args.file}:{lineno}: {exc}\n")
            failed = True
    reports = build_reports(tables, kinds, args.method, opts, args.parallel)
    header = ["table"]
    for kind in kinds:
        header.append(kind.label)
        if args.method in ("asymptotic", "both"):
            header.append(f"{kind.label}_asymptotic_p")
        if args.method in ("exact", "both"):
            header.append(f"{kind.label}_exact_p")
    out.write("\t".join(header) + "\n")
    for rep in reports:
        fields = [str(rep.table)]
        for row in rep.rows:
            fields.append(format_number(row.value))
            if args.method in ("asymptotic", "both"):
                fields.append(format_p(row.asymptotic))
            if args.method in ("exact", "both"):
                fields.append(format_p(row.exact))
        out.write("\t".join(fields) + "\n")
    return EXIT_PARTIAL if failed else EXIT_OK


def _study(args: argparse.Namespace, out: TextIO, err: TextIO, scaled: bool) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = StudyConfig.parse(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    for key in ("replicates", "seed", "output", "abort_threshold"):
        value = getattr(args, key)
        if value is not None:
            cfg.set(key, str(value))
    cfg.validate()

    columns = ["n1", "n2", "delta", "lambda2", "kind", "method", "alpha", "hits", "b", "power",
               "ci_half"]
    if scaled:
        columns.append("scaled")
    sink = open(cfg.output, "w", encoding="utf-8") if cfg.output else out
    status = EXIT_OK
    try:
        if args.format == "tsv":
            sink.write("\t".join(columns) + "\n")
        for n1, n2, delta, lam in cfg.cells():
            try:
                spec = GeneticModelSpec(cfg.k, cfg.maf, delta, lam)
                theta_from_model(spec)
            except (PenetranceOverflowError, ValueError) as exc:
                err.write(f"skipping n1={n1} n2={n2} delta={delta:g} lambda2={lam:g}: {exc}\n")
                status = EXIT_PARTIAL
                continue
            design = StudyDesign(n1, n2, spec, cfg.replicates, tuple(cfg.alphas), cfg.seed,
                                 cfg.abort_threshold)
            estimate = estimate_power(design, threads=args.parallel)
            for rec in estimate.records():
                values = [n1, n2, f"{delta:g}", f"{lam:g}", rec.kind.label, rec.method,
                          f"{rec.alpha:g}", rec.hits, rec.b, format_number(rec.power),
                          format_number(rec.ci_half)]
                if scaled:
                    values.append(format_number(rec.scaled))
                if args.format == "tsv":
                    sink.write("\t".join(str(v) for v in values) + "\n")
                else:
                    row = dict(zip(columns, values))
                    row.update(n1=n1, n2=n2, delta=delta, lambda2=lam, alpha=rec.alpha,
                               power=rec.power, ci_half=rec.ci_half)
                    if scaled:
                        row["scaled"] = rec.scaled
                    sink.write(json.dumps(row) + "\n")
            sink.flush()
    finally:
        if sink is not out:
            sink.close()
    return status


def cmd_size(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    return _study(args, out, err, scaled=True)


def cmd_power(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    return _study(args, out, err, scaled=args.scaled)


def cmd_maxcount(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    n1, n2 = sorted((args.n1, args.n2))
    if n1 < 1:
        raise UsageError("row totals must be positive")
    out.write(f"{max_summands(n1, n2)}\n")
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    cols = _int_list(args.margins, "margins")
    if len(cols) != 3:
        raise UsageError("margins must be three column totals M0,M1,M2")
    try:
        m = Margins.from_columns(tuple(cols), args.n1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lf = log_factorials(m.total)
    out.write("x0\tx1\tx2\ty0\ty1\ty2\tprobability\n")
    probs = []
    for t in enumerate_tables(m):
        p = hypergeometric_prob(t, lf)
        probs.append(p)
        out.write("\t".join(str(c) for c in t.counts) + f"\t{format_number(p)}\n")
    out.write(f"# total\t{math.fsum(probs):.6f}\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _threads(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("need at least one worker")
    return value


def _add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stats", default="all",
                   help="comma-separated statistics (CATT, Pearson, MIN2, MAX3, CMAX, CLRT, "
                        "MERT) or 'all'")
    p.add_argument("--method", choices=METHOD_CHOICES, default="both")
    p.add_argument("--abort-threshold", type=float, default=None,
                   help="stop the exact sum once it exceeds this value")
    p.add_argument("--no-abort", action="store_true", help="always compute the full exact sum")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genassoc",
                                     description="Robust association tests on 2x3 "
                                                 "case-control genotype tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test one table")
    p.add_argument("table", help="x0,x1,x2,y0,y1,y2 (cases then controls)")
    _add_test_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("batch", help="test every table of a CSV file")
    p.add_argument("file")
    _add_test_flags(p)
    p.add_argument("--parallel", type=_threads, default=None,
                   help="worker threads (default: GENASSOC_THREADS or all cores)")
    p.set_defaults(func=cmd_batch)

    for name, func in (("size", cmd_size), ("power", cmd_power)):
        p = sub.add_parser(name, help=f"Monte Carlo {name} study")
        p.add_argument("config", help="key=value study configuration file")
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--abort-threshold", type=float, default=None)
        p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
        p.add_argument("--parallel", type=_threads, default=None)
        if name == "power":
            p.add_argument("--scaled", action="store_true", help="add the 5/alpha scaled column")
        p.set_defaults(func=func)

    p = sub.add_parser("maxcount", help="maximum number of tables for row totals n1, n2")
    p.add_argument("n1", type=int)
    p.add_argument("n2", type=int)
    p.set_defaults(func=cmd_maxcount)

    p = sub.add_parser("enumerate", help="list every table with the given margins")
    p.add_argument("margins", help="column totals M0,M1,M2")
    p.add_argument("--n1", type=int, required=True, help="number of cases")
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err), contextlib.redirect_stdout(out):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    if getattr(args, "parallel", None) is None and hasattr(args, "parallel"):
        args.parallel = default_threads()
    try:
        return args.func(args, out, err)
    except UsageError as exc:
        err.write(f"genassoc: error: {exc}\n")
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``)
        sys.stdout = None
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
