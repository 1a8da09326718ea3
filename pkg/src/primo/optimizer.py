"""The PriMO optimizer: a MOASHA initial design followed by epsilon-greedy,
prior-weighted, randomly scalarized Bayesian optimization.

Budgets are measured in equivalent full evaluations: an evaluation at fidelity
``z`` costs ``z / z_max`` and continuing a configuration from ``z_prev`` to
``z`` costs ``(z - z_prev) / z_max``.  Internally the budget is tracked in whole
fidelity units so the accounting is exact.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import DomainError
from .errors import BenchmarkError
from .moasha import DEFAULT_ETA, Scheduler
from .pareto import pareto_set
from .priors import PriorSet
from .runlog import RunLog, Trial, best_value_trace, hv_trace
from .scalarization import sample_weights, scalarize
from .search_space import Configuration
from .surrogate import (
    DEFAULT_CANDIDATES,
    DEFAULT_EPSILON,
    AcquisitionContext,
    acquire,
    fit_gp,
    gamma,
)

logger = logging.getLogger(__name__)

MULTI_OBJECTIVE = "multi_objective"
SINGLE_OBJECTIVE = "single_objective"


@dataclass(frozen=True)
class PrimoConfig:
    n_init: float = 5.0
    eta: int = DEFAULT_ETA
    epsilon: float = DEFAULT_EPSILON
    budget: float = 20.0
    mode: str = MULTI_OBJECTIVE
    disable_init_design: bool = False
    disable_priors: bool = False
    disable_epsilon: bool = False
    candidate_budget: int = DEFAULT_CANDIDATES

    def __post_init__(self):
        if not 0 < self.n_init < self.budget:
            raise DomainError("need 0 < n_init < budget")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError("epsilon must lie in [0, 1]")
        if self.mode not in (MULTI_OBJECTIVE, SINGLE_OBJECTIVE):
            raise DomainError(f"unknown mode {self.mode!r}")

    @property
    def effective_epsilon(self) -> float:
        if self.disable_priors:
            return 1.0
        if self.disable_epsilon:
            return 0.0
        return self.epsilon

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    pareto: list  # (Configuration, objective vector) pairs
    trials: RunLog
    hv_trace: list  # (k, hypervolume)
    weights: np.ndarray | None = None
    best_trace: list | None = None  # single-objective runs only

    @property
    def final_hv(self) -> float:
        return self.hv_trace[-1][1] if self.hv_trace else 0.0

    @property
    def total_budget(self) -> float:
        return self.trials.total


class Evaluator:
    """Evaluates configurations, charges the budget and appends trials to a log."""

    def __init__(self, benchmark, log: RunLog | None = None, record_wall_time: bool = False):
        self.benchmark = benchmark
        self.z_max = benchmark.z_max
        self.log = log if log is not None else RunLog(header={})
        self.units = 0
        self.record_wall_time = record_wall_time
        self.archive: list[tuple[Configuration, np.ndarray]] = []

    @property
    def spent(self) -> float:
        return self.units / self.z_max

    def within(self, budget: float) -> bool:
        return self.units < budget * self.z_max

    def __call__(
        self,
        config: Configuration,
        z: int,
        previous_z: int = 0,
        weights=None,
        phase: str = "",
    ) -> np.ndarray | None:
        dz = z - previous_z
        start = time.perf_counter()
        try:
            y = np.asarray(self.benchmark.evaluate(config, z), dtype=float)
            if not np.all(np.isfinite(y)):
                raise BenchmarkError("non-finite objective value")
            status = "ok"
        except BenchmarkError as exc:
            logger.warning("evaluation failed at z=%s: %s", z, exc)
            y, status = None, "failed"
        elapsed = time.perf_counter() - start
        self.units += dz
        scalar = None
        if y is not None and weights is not None and z == self.z_max:
            scalar = scalarize(weights, y)
        if y is not None and z == self.z_max:
            self.archive.append((config, y))
        self.log.append(
            Trial(
                index=len(self.log.trials),
                config=dict(config.values),
                fidelity=int(z),
                is_continuation=previous_z > 0,
                objectives=None if y is None else [float(v) for v in y],
                scalarized=scalar,
                delta=dz / self.z_max,
                cumulative=self.units / self.z_max,
                status=status,
                phase=phase,
                wall_time=elapsed if self.record_wall_time else None,
            )
        )
        return y

    def result(self, weights=None) -> RunResult:
        self.log.close()
        configs = [c for c, _ in self.archive]
        ys = np.array([y for _, y in self.archive]).reshape(-1, self.benchmark.n_objectives)
        front = pareto_set(ys, payloads=configs) if len(ys) else []
        trace = hv_trace(self.log.trials, self.benchmark.reference_point, self.z_max)
        best = None
        if self.benchmark.n_objectives == 1:
            best = best_value_trace(self.log.trials, self.z_max)
        return RunResult(front, self.log, trace, weights, best)


@dataclass
class Dataset:
    """Scalarized full-fidelity observations seen by the GP."""

    X: list = field(default_factory=list)
    y: list = field(default_factory=list)

    def __len__(self):
        return len(self.y)

    def add(self, u, value: float) -> None:
        self.X.append(np.asarray(u, dtype=float))
        self.y.append(float(value))

    def arrays(self):
        return np.array(self.X), np.array(self.y)


@dataclass
class InitDesign:
    dataset: Dataset
    archive: list
    budget: float


def init_design(
    n_init: float,
    benchmark,
    weights,
    rng: np.random.Generator,
    eta: int = DEFAULT_ETA,
    evaluator: Evaluator | None = None,
    sampler: Callable | None = None,
) -> InitDesign:
    """Run (MO)ASHA until ``n_init`` equivalent evaluations are spent.

    Only results at the maximum fidelity enter the returned dataset.
    """
    if n_init <= 0:
        raise DomainError("n_init must be positive")
    space = benchmark.space
    evaluator = evaluator if evaluator is not None else Evaluator(benchmark)
    sampler = sampler if sampler is not None else space.sample_uniform
    sched = Scheduler(benchmark.z_min, benchmark.z_max, eta)
    data = Dataset()
    archive = []
    start = evaluator.units
    while evaluator.units - start < n_init * benchmark.z_max:
        s = sched.suggest(rng, sampler)
        y = evaluator(s.config, s.fidelity, s.previous_fidelity, weights, phase="init")
        if y is None:
            sched.observe_failure(s.config_id, s.fidelity)
            continue
        sched.observe(s.config_id, s.fidelity, y)
        if s.fidelity == benchmark.z_max:
            data.add(s.config.normalized, scalarize(weights, y))
            archive.append((s.config, y))
    return InitDesign(data, archive, (evaluator.units - start) / benchmark.z_max)


def prior_sampler(space, prior_set) -> Callable:
    """New-config sampler drawing from a uniformly chosen prior of ``prior_set``."""

    def draw(rng):
        j = int(rng.integers(len(prior_set)))
        return prior_set[j].sample(space, rng)

    return draw


def sobol_design(n_d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` scrambled Sobol points in the unit cube."""
    sampler = qmc.Sobol(d=n_d, scramble=True, seed=rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # balance warning for non powers of two
        return sampler.random(n)


def _evaluate_full(evaluator, data, config, weights, phase):
    y = evaluator(config, evaluator.z_max, 0, weights, phase=phase)
    if y is not None:
        data.add(config.normalized, scalarize(weights, y))
    return y


def seed_design(evaluator, data, points, weights, phase="design") -> None:
    for u in points:
        _evaluate_full(evaluator, data, evaluator.benchmark.space.denormalize(u), weights, phase)


def ensure_fittable(evaluator, data, weights, rng, budget) -> None:
    """Top the dataset up to two points with uniform full-fidelity samples."""
    space = evaluator.benchmark.space
    while len(data) < 2 and evaluator.within(budget):
        logger.info("dataset has %d point(s); adding a uniform full-fidelity sample", len(data))
        _evaluate_full(evaluator, data, space.sample_uniform(rng), weights, "fallback")


def bo_loop(
    evaluator: Evaluator,
    data: Dataset,
    weights,
    prior_set,
    rng: np.random.Generator,
    budget: float,
    epsilon: float,
    decay=gamma,
    candidate_budget: int = DEFAULT_CANDIDATES,
) -> int:
    """Full-fidelity BO steps until ``budget`` is spent; returns the number of proposals."""
    space = evaluator.benchmark.space
    n_bo = 0
    while evaluator.within(budget):
        if len(data) < 2:
            ensure_fittable(evaluator, data, weights, rng, budget)
            continue
        X, y = data.arrays()
        model = fit_gp(X, y)
        ctx = AcquisitionContext(X, y, n_bo=n_bo, epsilon=epsilon)
        proposal = acquire(ctx, model, prior_set, rng, candidate_budget, decay)
        n_bo += 1
        config = space.denormalize(proposal.x)
        result = evaluator(config, evaluator.z_max, 0, weights, phase="bo")
        if result is None:
            imputed = float(np.max(y) + np.std(y))
            logger.warning("imputing failed BO evaluation with %.6g", imputed)
            data.add(config.normalized, imputed)
        else:
            data.add(config.normalized, scalarize(weights, result))
    return n_bo


def _new_log(benchmark, optimizer: str, seed, prior_set, defaults: dict) -> RunLog:
    return RunLog(
        header={
            "optimizer": optimizer,
            "benchmark": benchmark.name,
            "seed": seed,
            "prior_condition": prior_set.label if prior_set else "none",
            "defaults": defaults,
            "reference_point": [float(r) for r in benchmark.reference_point],
            "z_max": benchmark.z_max,
            "n_objectives": benchmark.n_objectives,
            "senses": list(benchmark.senses),
        }
    )


def primo_run(
    benchmark,
    prior_set: PriorSet | None,
    config: PrimoConfig = PrimoConfig(),
    rng: np.random.Generator | None = None,
    seed=None,
    log: RunLog | None = None,
    optimizer_name: str = "primo",
) -> RunResult:
    """Run PriMO on ``benchmark`` for ``config.budget`` equivalent evaluations."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    n = benchmark.n_objectives
    if config.mode == SINGLE_OBJECTIVE and n != 1:
        raise DomainError("single-objective mode needs a one-objective benchmark")
    if not config.disable_priors:
        if prior_set is None or len(prior_set) != n:
            raise DomainError(f"need one prior per objective ({n})")
    priors = None if config.disable_priors else prior_set
    log = log if log is not None else _new_log(benchmark, optimizer_name, seed, priors, config.snapshot())
    evaluator = Evaluator(benchmark, log)
    weights = sample_weights(n, rng)
    data = Dataset()
    if config.disable_init_design:
        seed_design(evaluator, data, sobol_design(benchmark.space.n_d, benchmark.space.n_d, rng), weights)
    else:
        sampler = None
        if priors is not None:
            sampler = prior_sampler(benchmark.space, priors)
        init = init_design(config.n_init, benchmark, weights, rng, config.eta, evaluator, sampler)
        data = init.dataset
    ensure_fittable(evaluator, data, weights, rng, config.budget)
    bo_loop(
        evaluator,
        data,
        weights,
        priors,
        rng,
        config.budget,
        config.effective_epsilon,
        gamma,
        config.candidate_budget,
    )
    return evaluator.result(weights)


def primo_so_run(benchmark, prior, config: PrimoConfig | None = None, rng=None, seed=None, log=None):
    """Single-objective PriMO: ASHA initial design and the single prior in every prior branch."""
    if benchmark.n_objectives != 1:
        raise DomainError("single-objective PriMO needs a one-objective benchmark")
    config = config or PrimoConfig(mode=SINGLE_OBJECTIVE)
    if config.mode != SINGLE_OBJECTIVE:
        config = PrimoConfig(**{**asdict(config), "mode": SINGLE_OBJECTIVE})
    prior_set = prior if isinstance(prior, PriorSet) or prior is None else PriorSet((prior,))
    return primo_run(benchmark, prior_set, config, rng=rng, seed=seed, log=log, optimizer_name="primo-so")
