"""Demo 1: the foraging track and its exact optimal policy.

Run with ``python demos/01_environment_and_oracle.py``.  Nothing is learned
here; the script shows the reward schedule an agent faces, the value table
computed by value iteration, and how regret is measured against it.
"""

# %% The reward schedule
import numpy as np

from proforg.env import EnvConfig, EnvState, reward_table, run_policy
from proforg.oracle import normalized_regret, optimal_trajectory, prospective_regret, solve

cfg = EnvConfig()  # 7 cells, patches at 2 and 5, period 10, decay tau 2, discount 0.9
np.set_printoptions(precision=3, suppress=True, linewidth=110)
print("reward paid on arrival, one row per phase of the period:")
print(reward_table(cfg))
# Patch A is fresh at phase 0 and patch B half a period later, so a good
# forager shuttles between them and arrives just as each one peaks.

# %% Value iteration over (position, phase)
table = solve(cfg)
print(f"\nvalue iteration: {table.sweeps} sweeps, residual {table.residual:.1e}")
print("optimal move per (cell, phase):")
print(table.policy)

# %% The optimal route from the centre
start = EnvState(3, 0)
route = optimal_trajectory(table, cfg, start, 20)
print("\noptimal positions over 20 ticks:", route.tolist())

# %% Regret of a lazy policy that never moves
T = 20
lazy = run_policy(cfg, lambda position, tick: 0, start, T).positions()
reg = prospective_regret(lazy, table, cfg, start.tick, T)
print(f"standing still for {T} ticks: regret {reg:.3f}, "
      f"normalized {normalized_regret(reg, table, start, T):.3f}")
reg_opt = prospective_regret(route, table, cfg, start.tick, T)
print(f"following the oracle: regret {reg_opt:.3f}")
