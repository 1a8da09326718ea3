"""
Pareto fronts, hypervolume and priors on the bi-sphere problem
==============================================================

"""

import numpy as np

from primo.benchmarks import get_benchmark
from primo.pareto import hypervolume, pareto_set
from primo.priors import construct_prior

bench = get_benchmark("bisphere-d2-b0")
print(bench.describe())

# a few hundred random configurations, evaluated at the top fidelity
rng = np.random.default_rng(0)
U = rng.random((300, 2))
Y = bench.evaluate_unit(U, bench.z_max)
front = pareto_set(Y)
print(f"{len(front)} of {len(Y)} points are non-dominated")
print(f"hypervolume {hypervolume(front, bench.reference_point):.4f} "
      f"(dense grid: {bench.best_known_hv:.4f})")

# the same points seen through a cheap fidelity
Y_low = get_benchmark("bisphere-d2-b05").evaluate_unit(U, bench.z_min)
print("rank agreement f1, z_min vs z_max:",
      np.corrcoef(np.argsort(np.argsort(Y_low[:, 0])), np.argsort(np.argsort(Y[:, 0])))[0, 1].round(3))

# good priors sit near each objective's optimum, bad ones on the worst point
for q in ("good", "bad"):
    for i in range(2):
        p = construct_prior(bench, i, q)
        print(f"{q:4s} prior for f{i + 1}: mean {p.mean.round(3)}  optimum {bench.optimum_unit(i)}")

# density of the good f1 prior along the diagonal
p = construct_prior(bench, 0, "good")
t = np.linspace(0, 1, 6)
print("pdf on diagonal:", p.pdf(np.column_stack([t, t])).round(3))
