"""Demo 2: one online ProForg run, decision by decision.

Run with ``python demos/02_proforg_online.py``.  The planner explores at
random for a short warm-up, fits two forests (reward on arrival and discounted
reward still to come), then plans six moves ahead at every tick and executes
only the first move.  The script prints the regret curve and writes an SVG.
"""

# %% Configure a small run
from pathlib import Path

import numpy as np

from proforg.embedding import EmbeddingConfig
from proforg.env import EnvConfig, EnvState
from proforg.harness import Series, plot
from proforg.learners import RegressorSpec
from proforg.oracle import normalized_regret, prospective_regret, solve
from proforg.planner import PlannerConfig, run, score_path

env = EnvConfig()
embed = EmbeddingConfig()
planner_cfg = PlannerConfig(warmup_steps=200)
spec = RegressorSpec(n_trees=50, seed=0)
table = solve(env)
T = 20

# %% Run and keep the models the planner used at each step
snapshots = {}


def keep(k, transition, models):
    if k in (0, 39):
        snapshots[k] = models


result = run(env, planner_cfg, embed, spec, online_steps=40 + T, rng=np.random.default_rng(0),
             callback=keep)
positions = result.trajectory.positions()

# %% Regret at each online step, scored on what the agent actually did next
steps = np.arange(0, 41, 2)
curve = []
for k in steps:
    t = planner_cfg.warmup_steps + k
    reg = prospective_regret(positions[t:t + T + 1], table, env, t, T)
    curve.append(normalized_regret(reg, table, EnvState(int(positions[t]), t), T))
for k, v in zip(steps, curve):
    print(f"online step {k:3d}  normalized regret {v:.3f}")

# %% What does the score of a path consist of?
models = snapshots[39]
t = planner_cfg.warmup_steps + 40
state = EnvState(int(positions[t]), t)
path = np.array([state.position] * 6)  # stay put for six ticks
for variant in ("instantaneous_only", "terminal_only", "full"):
    print(f"{variant:>20}: {score_path(path, models.inst, models.term, 0.9, t, variant):.4f}")
# The full score is exactly the sum of the other two.

# %% Plot
out = Path("demo_proforg.svg")
out.write_text(plot([Series("proforg seed 0", steps, np.array(curve))]), encoding="utf-8")
print("wrote", out)
