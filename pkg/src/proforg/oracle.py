"""Exact Bayes-optimal control of the foraging track and prospective regret.

Rewards depend on time only through the phase ``tick mod period``, so the
optimal value lives on the finite grid ``(position, phase)`` and is found by
plain value iteration on that deterministic system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import ACTIONS, EnvConfig, EnvState, reward_table

# Ties closer than this are resolved by action order (-1, 0, +1).
TIE_TOL = 1e-12


@dataclass(frozen=True)
class OracleTable:
    value: np.ndarray  # (width, period)
    policy: np.ndarray  # (width, period), actions in {-1, 0, +1}
    gamma: float
    residual: float
    sweeps: int
    env: EnvConfig

    def action(self, position: int, tick: int) -> int:
        return int(self.policy[position, tick % self.env.period])

    def state_value(self, position: int, tick: int) -> float:
        return float(self.value[position, tick % self.env.period])


def first_argmax(values, tol: float = TIE_TOL) -> int:
    """Index of the first entry within ``tol`` (relative) of the maximum."""
    values = np.asarray(values, dtype=np.float64)
    best = values.max()
    return int(np.flatnonzero(values >= best - tol * max(1.0, abs(best)))[0])


def _q_values(cfg: EnvConfig, rewards: np.ndarray, value: np.ndarray, gamma: float) -> np.ndarray:
    """``q[a, p, k]`` for action ``ACTIONS[a]`` from ``(p, k)``; ``-inf`` where illegal."""
    W, r = cfg.width, cfg.period
    nxt_phase = (np.arange(r) + 1) % r
    q = np.full((len(ACTIONS), W, r), -np.inf)
    for ai, a in enumerate(ACTIONS):
        lo, hi = max(0, -a), min(W, W - a)
        p = np.arange(lo, hi)
        q[ai, p, :] = rewards[nxt_phase][:, p + a].T + gamma * value[p + a][:, nxt_phase]
    return q


def solve(cfg: EnvConfig, gamma: float | None = None, tolerance: float = 1e-10,
          max_sweeps: int = 100_000) -> OracleTable:
    gamma = cfg.gamma if gamma is None else gamma
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    rewards = reward_table(cfg)
    value = np.zeros((cfg.width, cfg.period))
    residual = np.inf
    sweeps = 0
    while residual >= tolerance:
        if sweeps >= max_sweeps:
            raise RuntimeError(f"value iteration did not converge in {max_sweeps} sweeps")
        new = _q_values(cfg, rewards, value, gamma).max(axis=0)
        residual = float(np.max(np.abs(new - value)))
        value = new
        sweeps += 1
    q = _q_values(cfg, rewards, value, gamma)
    policy = np.empty((cfg.width, cfg.period), dtype=np.int64)
    for p in range(cfg.width):
        for k in range(cfg.period):
            policy[p, k] = ACTIONS[first_argmax(q[:, p, k])]
    return OracleTable(value, policy, gamma, residual, sweeps, cfg)


def optimal_trajectory(table: OracleTable, cfg: EnvConfig, start: EnvState, T: int) -> np.ndarray:
    """Positions ``x*_0 .. x*_T`` of the greedy tabled policy (``T + 1`` entries)."""
    if cfg != table.env:
        raise ValueError("oracle table was solved for a different environment")
    out = np.empty(T + 1, dtype=np.int64)
    p, t = start.position, start.tick
    out[0] = p
    for k in range(T):
        p += table.action(p, t)
        t += 1
        out[k + 1] = p
    return out


def _window(actual, T: int) -> np.ndarray:
    actual = np.asarray(actual, dtype=np.int64)
    if len(actual) < T + 1:
        raise ValueError(
            f"need {T + 1} positions (start plus {T} moves), got {len(actual)}"
        )
    return actual[: T + 1]


def _window_reward(cfg: EnvConfig, positions: np.ndarray, start_tick: int, gamma: float) -> np.ndarray:
    T = len(positions) - 1
    rewards = reward_table(cfg)
    ticks = start_tick + 1 + np.arange(T)
    return gamma ** np.arange(T) * rewards[ticks % cfg.period, positions[1:]]


def prospective_regret(actual, table: OracleTable, cfg: EnvConfig, start_tick: int,
                       T: int, gamma: float | None = None) -> float:
    """Window-averaged discounted reward gap to the oracle from the same start.

    ``actual`` holds the agent's positions starting with its position at
    ``start_tick``; the oracle is started from that same ``(position, tick)``.
    """
    gamma = table.gamma if gamma is None else gamma
    actual = _window(actual, T)
    best = optimal_trajectory(table, cfg, EnvState(int(actual[0]), start_tick), T)
    gap = _window_reward(cfg, best, start_tick, gamma) - _window_reward(cfg, actual, start_tick, gamma)
    return float(gap.sum() / T)


def oracle_window_reward(table: OracleTable, cfg: EnvConfig, start: EnvState, T: int,
                         gamma: float | None = None) -> float:
    gamma = table.gamma if gamma is None else gamma
    best = optimal_trajectory(table, cfg, start, T)
    return float(_window_reward(cfg, best, start.tick, gamma).sum() / T)


def normalized_regret(regret: float, table: OracleTable, start: EnvState, T: int,
                      gamma: float | None = None) -> float:
    norm = oracle_window_reward(table, table.env, start, T, gamma)
    if norm <= 0:
        raise ZeroDivisionError(f"oracle collects no reward from {start} over {T} steps")
    return regret / norm


def table_rows(table: OracleTable):
    """Yield ``(position, phase, value, action)`` rows in position-major order."""
    W, r = table.value.shape
    for p in range(W):
        for k in range(r):
            yield p, k, float(table.value[p, k]), int(table.policy[p, k])
