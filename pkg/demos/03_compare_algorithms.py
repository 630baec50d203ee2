"""Demo 3: ProForg against reinforcement learning baselines through the harness.

Run with ``python demos/03_compare_algorithms.py``.  Uses the same code path
as the ``proforg simulate`` and ``proforg compare`` commands, at sizes small
enough for a laptop (a few minutes).  Expect ProForg near zero regret after a
few dozen online steps, while the baselines are still exploring.
"""

# %% One config, several algorithms
from pathlib import Path

from proforg.harness import build, compare, run_experiment, write_comparison

out = Path("demo_runs")
base = {"seeds": "0..2", "online_steps": "300", "eval_every": "20",
        "learner.n_trees": "30", "fqi.n_trees": "10", "fqi.update_interval": "100",
        "sac.hidden": "64,64"}

dirs = []
for algo in ("proforg", "fqi", "sac"):
    cfg = build({**base, "algorithm": algo})
    records, summary = run_experiment(cfg, out / algo)
    dirs.append(out / algo)
    print(f"{algo:>8}: final mean normalized regret {summary.mean[-1]:.3f}, "
          f"steps to 0.05: {summary.steps_to_threshold}")

# %% Side by side
# Warm-up lengths differ, so the curves are clipped to their common step range.
comp = compare(dirs)
for warning in comp.warnings:
    print("note:", warning)
write_comparison(comp, out / "comparison")
print("wrote", out / "comparison" / "comparison.svg")
