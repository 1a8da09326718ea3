"""
One PriMO run next to MOASHA and random search
==============================================

"""

import numpy as np

from primo.baselines import moasha_run, rs_run
from primo.benchmarks import get_benchmark
from primo.optimizer import PrimoConfig, primo_run
from primo.priors import construct_prior_set

bench = get_benchmark("bisphere-d2-b05")
priors = construct_prior_set(bench, ["good", "good"])

# budget is counted in full-fidelity evaluations
res = primo_run(bench, priors, PrimoConfig(budget=20.0), seed=0)
print("weights", res.weights.round(3))
phases = [t.phase for t in res.trials.trials]
print({p: phases.count(p) for p in dict.fromkeys(phases)})

traces = {
    "primo": res.hv_trace,
    "moasha": moasha_run(bench, 20.0, seed=0).hv_trace,
    "rs": rs_run(bench, 20.0, seed=0).hv_trace,
}
print(" k " + "".join(f"{name:>9s}" for name in traces))
for k in range(0, 20, 2):
    print(f"{k + 1:2d} " + "".join(f"{tr[k][1]:9.4f}" for tr in traces.values()))

# Pareto set found by PriMO, in raw hyperparameter units
for config, y in sorted(res.pareto, key=lambda cy: cy[1][0]):
    print({k: round(v, 4) for k, v in config.values.items()}, np.round(y, 4))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for name, tr in traces.items():
        plt.plot([k for k, _ in tr], [h for _, h in tr], label=name)
    plt.xlabel("full evaluations")
    plt.ylabel("hypervolume")
    plt.legend()
    plt.savefig("one_run.png", dpi=120)
    print("wrote one_run.png")
except ImportError:
    pass
