"""Prior-guided multi-objective, multi-fidelity hyperparameter optimization."""

from .baselines import (
    bo_rw_run,
    moasha_ebo_run,
    moasha_prior_run,
    moasha_run,
    pibo_rw_run,
    rs_prior_run,
    rs_run,
)
from .benchmarks import get_benchmark
from .errors import (
    BenchmarkError,
    DomainError,
    MissingDataError,
    NumericError,
    ParseError,
    PrimoError,
    ProtocolError,
)
from .optimizer import PrimoConfig, RunResult, init_design, primo_run, primo_so_run
from .pareto import dominates, hypervolume, hvi, pareto_set
from .priors import Prior, PriorSet, construct_prior, construct_prior_set
from .search_space import Configuration, FidelitySpec, ParamSpec, SearchSpace

__version__ = "0.1.0"
