"""
A small experiment grid and its rank report
===========================================

The same thing from the shell::

    primo run --optimizer primo --optimizer moasha --optimizer rs \
        --benchmark bisphere-d2-b0 --seeds 3 --prior-condition good:good --out results
    primo report --out results

"""

import tempfile

from primo.harness import rank_report, run_grid

out = tempfile.mkdtemp(prefix="primo-grid-")
summary = run_grid(
    ["primo", "moasha", "rs"],
    ["bisphere-d2-b0"],
    seeds=3,
    prior_conditions=["good:good"],
    budget=10,
    out=out,
)
print(f"{len(summary.written)} logs under {out}")

# running again only reads what is on disk
print(len(run_grid(["primo", "moasha", "rs"], ["bisphere-d2-b0"], seeds=3,
                   prior_conditions=["good:good"], budget=10, out=out).skipped), "skipped")

rows = rank_report(out, "condition")
for k in (1, 5, 10):
    line = ", ".join(f"{r.optimizer} {r.mean_rank:.2f}" for r in rows if r.k == k)
    print(f"k={k:2d}: {line}")
