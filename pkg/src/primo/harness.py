"""Experiment grids, relative-rank reports and prior files.

Results are laid out as::

    <root>/<condition>/<benchmark>/<optimizer>/seed_<s>.log

where ``<condition>`` is the prior condition with ``:`` replaced by ``-``
(``good-bad``, ``none``, ...).  The root defaults to ``./results`` and can be
overridden with the ``PRIMO_RESULTS`` environment variable.

Each cell gets its own generator seeded from a hash of
``(optimizer, benchmark, seed, condition)``, so cells can run in any order or in
parallel without changing their logs.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .baselines import get_optimizer
from .benchmarks import get_benchmark
from .errors import DomainError, MissingDataError, ParseError
from .pareto import normalized_hv_regret
from .priors import (
    PRIOR_GLOBAL_SEED,
    PriorSet,
    construct_prior,
    load_prior,
    parse_condition,
    save_prior,
)
from .runlog import RunLog, hv_trace

logger = logging.getLogger(__name__)

RESULTS_ENV = "PRIMO_RESULTS"
DEFAULT_SEEDS = 25
DEFAULT_BUDGET = 20.0
GROUPINGS = ("condition", "all")


def results_root(out=None) -> Path:
    if out is not None:
        return Path(out)
    return Path(os.environ.get(RESULTS_ENV, "results"))


def condition_dir(condition: str) -> str:
    return condition.replace(":", "-")


def cell_path(root, condition: str, benchmark: str, optimizer: str, seed: int) -> Path:
    return Path(root) / condition_dir(condition) / benchmark / optimizer / f"seed_{seed}.log"


def cell_rng(optimizer: str, benchmark: str, seed: int, condition: str) -> np.random.Generator:
    key = "\x1f".join([optimizer, benchmark, str(seed), condition]).encode()
    digest = hashlib.sha256(key).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


# -- priors --------------------------------------------------------------------


def prior_path(out, benchmark: str, objective_index: int, quality: str) -> Path:
    return Path(out) / benchmark / f"obj{objective_index}-{quality}.json"


def priors_generate(benchmark, qualities, out, seed: int = PRIOR_GLOBAL_SEED) -> list[Path]:
    """Write one prior file per objective for the condition ``qualities``."""
    bench = get_benchmark(benchmark) if isinstance(benchmark, str) else benchmark
    if isinstance(qualities, str):
        qualities = parse_condition(qualities, bench.n_objectives)
        if qualities is None:
            raise DomainError("the 'none' condition has no prior files")
    if len(qualities) != bench.n_objectives:
        raise DomainError("need one quality label per objective")
    paths = []
    for i, q in enumerate(qualities):
        prior = construct_prior(bench, i, q, seed=seed)
        path = prior_path(out, bench.name, i, q)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_prior(prior, bench.space, path, benchmark=bench.name)
        paths.append(path)
    return paths


def load_condition(bench, condition: str, priors_dir=None) -> PriorSet | None:
    """Prior set for ``condition``: read from ``priors_dir`` or constructed on the fly."""
    qualities = parse_condition(condition, bench.n_objectives)
    if qualities is None:
        return None
    priors = []
    for i, q in enumerate(qualities):
        if priors_dir is not None:
            path = prior_path(priors_dir, bench.name, i, q)
            if not path.exists():
                raise MissingDataError(f"prior file {path} not found")
            priors.append(load_prior(path, bench.space))
        else:
            priors.append(construct_prior(bench, i, q))
    return PriorSet(tuple(priors))


# -- grid ------------------------------------------------------------------------


@dataclass
class GridSummary:
    root: Path
    written: list[Path] = field(default_factory=list)
    skipped: list[Path] = field(default_factory=list)


@dataclass(frozen=True)
class Cell:
    optimizer: str
    benchmark: str
    seed: int
    condition: str


def _is_complete(path: Path) -> bool:
    if not path.exists():
        return False
    try:
        return RunLog.load(path).complete
    except ParseError:
        return False


def run_cell(cell: Cell, budget: float, prior_set: PriorSet | None) -> RunLog:
    bench = get_benchmark(cell.benchmark)
    entry = get_optimizer(cell.optimizer)
    rng = cell_rng(cell.optimizer, bench.name, cell.seed, cell.condition)
    result = entry.run(bench, prior_set, budget, rng, cell.seed)
    log = result.trials
    log.header.update(
        optimizer=cell.optimizer,
        seed=cell.seed,
        prior_condition=cell.condition,
        budget=budget,
        best_known_hv=bench.best_known_hv,
    )
    return log


def _run_and_write(args) -> str:
    cell, budget, prior_set, path = args
    run_cell(cell, budget, prior_set).write(path)
    return str(path)


def _seed_list(seeds) -> list[int]:
    if isinstance(seeds, int):
        if seeds < 1:
            raise DomainError("need at least one seed")
        return list(range(seeds))
    return [int(s) for s in seeds]


def run_grid(
    optimizers: Sequence[str],
    benchmarks: Sequence[str],
    seeds: int | Iterable[int] = DEFAULT_SEEDS,
    prior_conditions: Sequence[str] = ("good",),
    budget: float = DEFAULT_BUDGET,
    out=None,
    force: bool = False,
    parallel: int = 1,
    priors_dir=None,
) -> GridSummary:
    """Run every (optimizer, benchmark, seed, condition) cell and write its log.

    Complete cells already on disk are skipped unless ``force`` is set.
    """
    root = results_root(out)
    entries = {name: get_optimizer(name) for name in optimizers}
    benches = {name: get_benchmark(name) for name in benchmarks}
    seed_list = _seed_list(seeds)
    summary = GridSummary(root)
    jobs = []
    for condition in prior_conditions:
        for bname, bench in benches.items():
            prior_set = load_condition(bench, condition, priors_dir)
            for oname, entry in entries.items():
                if entry.needs_priors and prior_set is None:
                    raise DomainError(f"optimizer {oname!r} needs a prior condition other than 'none'")
                for s in seed_list:
                    cell = Cell(oname, bench.name, s, condition)
                    path = cell_path(root, condition, bench.name, oname, s)
                    if not force and _is_complete(path):
                        summary.skipped.append(path)
                        continue
                    jobs.append((cell, budget, prior_set if entry.needs_priors else None, path))
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            summary.written.extend(Path(p) for p in pool.map(_run_and_write, jobs))
    else:
        summary.written.extend(Path(_run_and_write(job)) for job in jobs)
    logger.info("grid: %d cells written, %d skipped", len(summary.written), len(summary.skipped))
    return summary


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class RankRow:
    group: str
    optimizer: str
    k: int
    mean_rank: float
    se: float
    n: int


def collect(root) -> dict:
    """``{(condition, benchmark, optimizer, seed): RunLog}`` for every log below ``root``."""
    root = Path(root)
    if not root.is_dir():
        raise MissingDataError(f"results directory {root} not found")
    logs = {}
    for path in sorted(root.glob("*/*/*/seed_*.log")):
        log = RunLog.load(path)
        h = log.header
        logs[(h["prior_condition"], h["benchmark"], h["optimizer"], int(h["seed"]))] = log
    if not logs:
        raise MissingDataError(f"no run logs below {root}")
    return logs


def _score_matrix(log: RunLog, budget: int) -> np.ndarray:
    """Per-step score where larger is better."""
    if not log.complete:
        raise MissingDataError("incomplete run log")
    trace = np.array([hv for _, hv in hv_trace(log, log.reference_point, budget=budget)])
    best = log.header.get("best_known_hv")
    if log.header.get("n_objectives") == 1 and best:
        return -normalized_hv_regret(trace, best)
    return trace


def rank_report(
    root=None,
    grouping: str = "condition",
    optimizers: Sequence[str] | None = None,
    budget: int | None = None,
) -> list[RankRow]:
    """Mean relative rank (1 = best) per optimizer and step ``k``.

    Optimizers are ranked within each (condition, benchmark, seed, k) by
    hypervolume, or by normalized regret for single-objective runs, with ties
    sharing their mean rank.  The ranks are then averaged over benchmarks and
    seeds, per prior condition (``grouping="condition"``) or over all
    conditions together (``grouping="all"``).
    """
    if grouping not in GROUPINGS:
        raise DomainError(f"grouping must be one of {GROUPINGS}")
    logs = collect(results_root(root))
    conds = sorted({c for c, _, _, _ in logs})
    benches = sorted({b for _, b, _, _ in logs})
    opts = sorted(optimizers) if optimizers else sorted({o for _, _, o, _ in logs})
    seeds = sorted({s for _, _, _, s in logs})
    missing = [
        cell
        for cell in itertools.product(conds, benches, opts, seeds)
        if cell not in logs or not logs[cell].complete
    ]
    if missing:
        listing = "\n".join(f"  {c}/{b}/{o}/seed_{s}" for c, b, o, s in missing)
        raise MissingDataError(f"{len(missing)} cell(s) missing or incomplete:\n{listing}")
    if budget is None:
        budget = int(min(float(log.header.get("budget", log.total)) for log in logs.values()))
    # ranks[cond] has shape (n_opt, n_bench * n_seed, budget)
    ranks = {}
    for c in conds:
        blocks = []
        for b, s in itertools.product(benches, seeds):
            scores = np.array([_score_matrix(logs[(c, b, o, s)], budget) for o in opts])
            blocks.append(rankdata(-scores, method="average", axis=0))
        ranks[c] = np.stack(blocks, axis=1)
    groups = {c: ranks[c] for c in conds}
    if grouping == "all":
        groups = {"all": np.concatenate([ranks[c] for c in conds], axis=1)}
    rows = []
    for g, r in groups.items():
        n = r.shape[1]
        mean = r.mean(axis=1)
        se = r.std(axis=1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
        for i, o in enumerate(opts):
            for k in range(budget):
                rows.append(RankRow(g, o, k + 1, float(mean[i, k]), float(se[i, k]), n))
    return rows


def write_report_csv(rows: Sequence[RankRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "optimizer", "k", "mean_rank", "se", "n"])
        for r in rows:
            w.writerow([r.group, r.optimizer, r.k, repr(r.mean_rank), repr(r.se), r.n])


def write_report_svg(rows: Sequence[RankRow], path) -> None:
    """Line chart of mean rank over ``k``, one panel per group."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = sorted({r.group for r in rows})
    fig, axes = plt.subplots(1, len(groups), figsize=(4 * len(groups), 3.2), squeeze=False)
    for ax, g in zip(axes[0], groups):
        for opt in sorted({r.optimizer for r in rows if r.group == g}):
            sel = [r for r in rows if r.group == g and r.optimizer == opt]
            k = np.array([r.k for r in sel])
            m = np.array([r.mean_rank for r in sel])
            se = np.array([r.se for r in sel])
            ax.plot(k, m, label=opt)
            ax.fill_between(k, m - se, m + se, alpha=0.2)
        ax.set_title(g)
        ax.set_xlabel("full evaluations")
        ax.set_ylabel("mean rank")
        ax.invert_yaxis()
    axes[0][-1].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
