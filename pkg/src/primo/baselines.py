"""Comparison optimizers: random search, (MO)ASHA, BO with random weights and
piBO with random weights, each optionally guided by priors, plus the ablation
variants of PriMO.

Every runner returns a :class:`~primo.optimizer.RunResult` with the same
accounting and logging as :func:`~primo.optimizer.primo_run`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .moasha import DEFAULT_ETA, Scheduler
from .optimizer import (
    Dataset,
    Evaluator,
    PrimoConfig,
    RunResult,
    _new_log,
    bo_loop,
    ensure_fittable,
    primo_run,
    prior_sampler,
    seed_design,
    sobol_design,
)
from .priors import PriorSet
from .scalarization import sample_weights, scalarize
from .surrogate import (
    DEFAULT_CANDIDATES,
    DEFAULT_EPSILON,
    AcquisitionContext,
    acquire,
    fit_gp,
    gamma_pibo,
)

logger = logging.getLogger(__name__)

KINDS = ("rs", "rs_prior", "moasha", "moasha_prior", "bo_rw", "pibo_rw")


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    p_prior: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown baseline kind {self.kind!r}")
        if self.kind == "moasha_prior":
            if self.p_prior is None or not 0.0 <= self.p_prior <= 1.0:
                raise DomainError("moasha_prior needs p_prior in [0, 1]")
        elif self.p_prior is not None:
            raise DomainError("p_prior applies to moasha_prior only")


def _require_priors(prior_set, benchmark):
    if prior_set is None or len(prior_set) == 0:
        raise DomainError("this optimizer needs a prior set")
    if len(prior_set) != benchmark.n_objectives:
        raise DomainError(f"need one prior per objective ({benchmark.n_objectives})")


def _setup(benchmark, name, seed, prior_set, defaults, rng):
    rng = rng if rng is not None else np.random.default_rng(seed)
    log = _new_log(benchmark, name, seed, prior_set, defaults)
    return rng, Evaluator(benchmark, log)


def _prior_sampler(benchmark, prior_set):
    return prior_sampler(benchmark.space, prior_set)


# -- random search -------------------------------------------------------------


def _random_search(evaluator, sampler, rng, budget):
    while evaluator.within(budget):
        evaluator(sampler(rng), evaluator.z_max, phase="rs")
    return evaluator.result()


def rs_run(benchmark, budget: float = 20.0, rng=None, seed=None) -> RunResult:
    rng, ev = _setup(benchmark, "rs", seed, None, {"budget": budget}, rng)
    return _random_search(ev, benchmark.space.sample_uniform, rng, budget)


def rs_prior_run(benchmark, prior_set: PriorSet, budget: float = 20.0, rng=None, seed=None):
    _require_priors(prior_set, benchmark)
    rng, ev = _setup(benchmark, "rs-prior", seed, prior_set, {"budget": budget}, rng)
    return _random_search(ev, _prior_sampler(benchmark, prior_set), rng, budget)


# -- MOASHA ----------------------------------------------------------------------


def _moasha_loop(evaluator, sampler, rng, budget, eta, phase="moasha"):
    bench = evaluator.benchmark
    sched = Scheduler(bench.z_min, bench.z_max, eta)
    while evaluator.within(budget):
        s = sched.suggest(rng, sampler)
        y = evaluator(s.config, s.fidelity, s.previous_fidelity, phase=phase)
        if y is None:
            sched.observe_failure(s.config_id, s.fidelity)
        else:
            sched.observe(s.config_id, s.fidelity, y)
    return sched


def moasha_prior_run(
    benchmark,
    prior_set: PriorSet | None,
    p_prior: float,
    budget: float = 20.0,
    rng=None,
    seed=None,
    eta: int = DEFAULT_ETA,
) -> RunResult:
    """MOASHA whose new configurations come from a random prior with probability ``p_prior``."""
    if not 0.0 <= p_prior <= 1.0:
        raise DomainError("p_prior must lie in [0, 1]")
    if p_prior > 0:
        _require_priors(prior_set, benchmark)
    name = "moasha" if p_prior == 0 else f"moasha-prior-{p_prior:g}"
    defaults = {"budget": budget, "eta": eta, "p_prior": p_prior}
    rng, ev = _setup(benchmark, name, seed, prior_set if p_prior > 0 else None, defaults, rng)
    uniform = benchmark.space.sample_uniform
    from_prior = _prior_sampler(benchmark, prior_set) if p_prior > 0 else None

    def sampler(r):
        if p_prior == 0.0:
            return uniform(r)
        if p_prior == 1.0:
            return from_prior(r)
        # the coin is only tossed for a genuine mixture
        return from_prior(r) if r.random() < p_prior else uniform(r)

    _moasha_loop(ev, sampler, rng, budget, eta)
    return ev.result()


def moasha_run(benchmark, budget: float = 20.0, rng=None, seed=None, eta: int = DEFAULT_ETA):
    return moasha_prior_run(benchmark, None, 0.0, budget, rng=rng, seed=seed, eta=eta)


# -- BO with random weights ------------------------------------------------------


def bo_rw_run(
    benchmark,
    budget: float = 20.0,
    rng=None,
    seed=None,
    candidate_budget: int = DEFAULT_CANDIDATES,
) -> RunResult:
    """Plain EI on a randomly weighted scalarization, seeded by ``n_d`` Sobol points."""
    defaults = {"budget": budget, "candidate_budget": candidate_budget}
    rng, ev = _setup(benchmark, "bo-rw", seed, None, defaults, rng)
    weights = sample_weights(benchmark.n_objectives, rng)
    data = Dataset()
    seed_design(ev, data, sobol_design(benchmark.space.n_d, benchmark.space.n_d, rng), weights)
    ensure_fittable(ev, data, weights, rng, budget)
    bo_loop(ev, data, weights, None, rng, budget, 1.0, candidate_budget=candidate_budget)
    return ev.result(weights)


def pibo_rw_run(
    benchmark,
    prior_set: PriorSet,
    budget: float = 20.0,
    rng=None,
    seed=None,
    candidate_budget: int = DEFAULT_CANDIDATES,
) -> RunResult:
    """Always prior-weighted EI with the slower ``exp(-n/d)`` decay."""
    _require_priors(prior_set, benchmark)
    defaults = {"budget": budget, "candidate_budget": candidate_budget, "decay": "pibo"}
    rng, ev = _setup(benchmark, "pibo-rw", seed, prior_set, defaults, rng)
    weights = sample_weights(benchmark.n_objectives, rng)
    data = Dataset()
    draw = _prior_sampler(benchmark, prior_set)
    for _ in range(benchmark.space.n_d):
        if not ev.within(budget):
            break
        config = draw(rng)
        y = ev(config, ev.z_max, weights=weights, phase="design")
        if y is not None:
            data.add(config.normalized, scalarize(weights, y))
    ensure_fittable(ev, data, weights, rng, budget)
    bo_loop(ev, data, weights, prior_set, rng, budget, 0.0, gamma_pibo, candidate_budget)
    return ev.result(weights)


# -- ablations -----------------------------------------------------------------


def moasha_ebo_run(
    benchmark,
    prior_set: PriorSet | None,
    budget: float = 20.0,
    rng=None,
    seed=None,
    eta: int = DEFAULT_ETA,
    epsilon: float = DEFAULT_EPSILON,
    candidate_budget: int = DEFAULT_CANDIDATES,
) -> RunResult:
    """MOASHA whose new configurations come from PriMO's epsilon-greedy BO sampler.

    The sampler fits the GP to the scalarized maximum-fidelity results so far;
    with fewer than two of them it samples uniformly.
    """
    if prior_set is not None:
        _require_priors(prior_set, benchmark)
    defaults = {"budget": budget, "eta": eta, "epsilon": epsilon, "candidate_budget": candidate_budget}
    rng, ev = _setup(benchmark, "moasha-ebo", seed, prior_set, defaults, rng)
    weights = sample_weights(benchmark.n_objectives, rng)
    space = benchmark.space
    state = {"n_bo": 0}

    def sampler(r):
        if len(ev.archive) < 2:
            return space.sample_uniform(r)
        X = np.array([c.normalized for c, _ in ev.archive])
        y = np.array([scalarize(weights, v) for _, v in ev.archive])
        model = fit_gp(X, y)
        ctx = AcquisitionContext(X, y, n_bo=state["n_bo"], epsilon=epsilon)
        proposal = acquire(ctx, model, prior_set, r, candidate_budget)
        state["n_bo"] += 1
        return space.denormalize(proposal.x)

    _moasha_loop(ev, sampler, rng, budget, eta, phase="moasha-ebo")
    return ev.result(weights)


# Ablations expressed through PrimoConfig flags or a dedicated runner.
ABLATIONS = {
    "primo-no-init": {"disable_init_design": True},
    "primo-no-prior": {"disable_priors": True},
    "primo-no-epsilon": {"disable_epsilon": True},
    "moasha-ebo": None,  # see moasha_ebo_run
}


def ablation_config(name: str, base: PrimoConfig = PrimoConfig()) -> PrimoConfig:
    if name not in ABLATIONS or ABLATIONS[name] is None:
        raise DomainError(f"{name!r} is not a PrimoConfig ablation")
    return replace(base, **ABLATIONS[name])


# -- registry --------------------------------------------------------------------

OUT_OF_SCOPE = ("nsga2", "parego", "hb-rw", "hyperband", "priorband", "mo-priorband", "priorband-bo")


@dataclass(frozen=True)
class OptimizerEntry:
    name: str
    needs_priors: bool
    run: object  # callable(benchmark, prior_set, budget, rng, seed) -> RunResult


def _primo_entry(flags):
    def run(bench, priors, budget, rng, seed):
        cfg = replace(PrimoConfig(budget=budget), **flags)
        if bench.n_objectives == 1:
            cfg = replace(cfg, mode="single_objective")
        return primo_run(bench, priors, cfg, rng=rng, seed=seed)

    return run


OPTIMIZERS = {
    "primo": OptimizerEntry("primo", True, _primo_entry({})),
    "primo-no-init": OptimizerEntry("primo-no-init", True, _primo_entry(ABLATIONS["primo-no-init"])),
    "primo-no-prior": OptimizerEntry("primo-no-prior", False, _primo_entry(ABLATIONS["primo-no-prior"])),
    "primo-no-epsilon": OptimizerEntry(
        "primo-no-epsilon", True, _primo_entry(ABLATIONS["primo-no-epsilon"])
    ),
    "moasha-ebo": OptimizerEntry(
        "moasha-ebo", True, lambda b, p, B, r, s: moasha_ebo_run(b, p, B, rng=r, seed=s)
    ),
    "rs": OptimizerEntry("rs", False, lambda b, p, B, r, s: rs_run(b, B, rng=r, seed=s)),
    "rs-prior": OptimizerEntry(
        "rs-prior", True, lambda b, p, B, r, s: rs_prior_run(b, p, B, rng=r, seed=s)
    ),
    "moasha": OptimizerEntry("moasha", False, lambda b, p, B, r, s: moasha_run(b, B, rng=r, seed=s)),
    "moasha-prior-50": OptimizerEntry(
        "moasha-prior-50", True, lambda b, p, B, r, s: moasha_prior_run(b, p, 0.5, B, rng=r, seed=s)
    ),
    "moasha-prior-100": OptimizerEntry(
        "moasha-prior-100", True, lambda b, p, B, r, s: moasha_prior_run(b, p, 1.0, B, rng=r, seed=s)
    ),
    "bo-rw": OptimizerEntry("bo-rw", False, lambda b, p, B, r, s: bo_rw_run(b, B, rng=r, seed=s)),
    "pibo-rw": OptimizerEntry(
        "pibo-rw", True, lambda b, p, B, r, s: pibo_rw_run(b, p, B, rng=r, seed=s)
    ),
}


def get_optimizer(name: str) -> OptimizerEntry:
    if name in OPTIMIZERS:
        return OPTIMIZERS[name]
    valid = ", ".join(sorted(OPTIMIZERS))
    if name in OUT_OF_SCOPE:
        raise DomainError(
            f"optimizer {name!r} is out of scope for this package; available: {valid}"
        )
    raise DomainError(
        f"unknown optimizer {name!r}; available: {valid}; "
        f"out of scope: {', '.join(OUT_OF_SCOPE)}"
    )
