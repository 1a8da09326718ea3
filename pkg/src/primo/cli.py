"""Command line front end: ``primo run|report|priors|bench|validate``.

Exit codes: 0 success, 1 usage error, 2 missing or malformed data, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .benchmarks import BENCHMARKS, DEFAULT_SUITE, get_benchmark, tabular_export, tabular_load
from .errors import DomainError, MissingDataError, NumericError, ParseError
from .priors import load_prior
from .runlog import RunLog, check_accounting, hv_trace
from .search_space import load_space

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="primo", description="Prior-guided multi-objective HPO experiments.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an optimizer x benchmark x seed x condition grid")
    run.add_argument("--optimizer", action="append", required=True, help="repeatable")
    run.add_argument("--benchmark", action="append", help="repeatable; default: bi-sphere suite")
    run.add_argument("--seeds", type=int, default=harness.DEFAULT_SEEDS)
    run.add_argument("--budget", type=float, default=harness.DEFAULT_BUDGET)
    run.add_argument("--prior-condition", action="append", help="e.g. good:bad; repeatable")
    run.add_argument("--priors", help="directory of prior files (default: construct)")
    run.add_argument("--out")
    run.add_argument("--parallel", type=int, default=1)
    run.add_argument("--force", action="store_true")

    rep = sub.add_parser("report", help="mean relative ranks from a results directory")
    rep.add_argument("--out", help="results directory")
    rep.add_argument("--grouping", choices=harness.GROUPINGS, default="condition")
    rep.add_argument("--optimizer", action="append")
    rep.add_argument("--budget", type=int)
    rep.add_argument("--csv", help="write the table here instead of stdout")
    rep.add_argument("--svg", help="also draw a line chart")

    pri = sub.add_parser("priors", help="write prior files for a condition")
    pri.add_argument("--benchmark", action="append", required=True)
    pri.add_argument("--prior-condition", action="append", required=True)
    pri.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="benchmark utilities")
    bsub = bench.add_subparsers(dest="bench_command", required=True, parser_class=_Parser)
    bsub.add_parser("list", help="list built-in benchmarks")
    exp = bsub.add_parser("export", help="export a benchmark as a table/1 file")
    exp.add_argument("name")
    exp.add_argument("--out", required=True)
    exp.add_argument("--points-per-dim", type=int, default=5)

    val = sub.add_parser("validate", help="check run logs, prior, table or space files")
    val.add_argument("paths", nargs="+")
    val.add_argument("--benchmark", help="benchmark whose space prior files refer to")
    return p


def _cmd_run(args) -> int:
    summary = harness.run_grid(
        args.optimizer,
        args.benchmark or list(DEFAULT_SUITE),
        seeds=args.seeds,
        prior_conditions=args.prior_condition or ["good"],
        budget=args.budget,
        out=args.out,
        force=args.force,
        parallel=args.parallel,
        priors_dir=args.priors,
    )
    print(f"{len(summary.written)} cell(s) written, {len(summary.skipped)} skipped under {summary.root}")
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = harness.rank_report(args.out, args.grouping, args.optimizer, args.budget)
    if args.csv:
        harness.write_report_csv(rows, args.csv)
    else:
        print("group,optimizer,k,mean_rank,se,n")
        for r in rows:
            print(f"{r.group},{r.optimizer},{r.k},{r.mean_rank:.4f},{r.se:.4f},{r.n}")
    if args.svg:
        harness.write_report_svg(rows, args.svg)
    return EXIT_OK


def _cmd_priors(args) -> int:
    for b in args.benchmark:
        for cond in args.prior_condition:
            for path in harness.priors_generate(b, cond, args.out):
                print(path)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.bench_command == "export":
        tabular_export(get_benchmark(args.name), args.out, args.points_per_dim)
        print(args.out)
        return EXIT_OK
    for name in sorted(BENCHMARKS):
        b = get_benchmark(name)
        ref = ", ".join(f"{r:g}" for r in b.reference_point)
        print(
            f"{name:18s} d={b.space.n_d} n={b.n_objectives} "
            f"z=[{b.z_min},{b.z_max}] ref=({ref}) best_hv={b.best_known_hv:.6g}"
        )
    return EXIT_OK


def _validate_one(path: Path, bench_name: str | None) -> list[str]:
    if path.is_dir():
        problems = []
        logs = sorted(path.rglob("*.log"))
        if not logs:
            raise MissingDataError(f"{path}: no run logs")
        for p in logs:
            problems += _validate_one(p, bench_name)
        return problems
    if not path.exists():
        raise MissingDataError(f"{path} not found")
    if path.suffix == ".log":
        log = RunLog.load(path)
        problems = [f"{path}: {m}" for m in check_accounting(log.trials)]
        if not log.complete:
            problems.append(f"{path}: run log has no footer")
        trace = [hv for _, hv in hv_trace(log, log.reference_point)]
        if np.any(np.diff(trace) < 0):
            problems.append(f"{path}: hypervolume trace decreases")
        return problems
    if path.suffix == ".ini":
        load_space(path)
        return []
    if path.suffix == ".json":
        d = json.loads(path.read_text())
        name = bench_name or d.get("benchmark")
        if not name:
            raise MissingDataError(f"{path}: pass --benchmark to validate this prior file")
        load_prior(path, get_benchmark(name).space)
        return []
    tabular_load(path)
    return []


def _cmd_validate(args) -> int:
    problems = []
    for p in args.paths:
        problems += _validate_one(Path(p), args.benchmark)
    for m in problems:
        print(m)
    if problems:
        return EXIT_NUMERIC
    print("ok")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "report": _cmd_report,
    "priors": _cmd_priors,
    "bench": _cmd_bench,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingDataError, ParseError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

