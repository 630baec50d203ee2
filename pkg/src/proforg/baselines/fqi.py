"""Online fitted Q-iteration with epsilon-greedy exploration.

The Q-function is a tree-ensemble regressor over ``position one-hot ++ action
one-hot [++ time code]``.  The time-agnostic variant simply drops the time
code, which makes its greedy policy a fixed map from cells to moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..embedding import EmbeddingConfig, embed_position, embed_time
from ..env import ACTIONS, EnvConfig, EnvState, Trajectory, legal_actions, step
from ..learners import Dataset, RegressorSpec, TrainedRegressor, fit
from ..oracle import first_argmax

EPSILON_FLOOR = 0.01
EPSILON_DECAY = 0.999


@dataclass(frozen=True)
class FQIConfig:
    iterations: int = 20
    gamma: float = 0.9
    epsilon0: float = 1.0
    warmup: int = 200
    update_interval: int = 50
    time_aware: bool = True
    n_trees: int = 1000
    max_depth: int = 0
    min_leaf: int = 1
    warm_start_q: bool = True
    random_ties: bool = True
    start_position: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError(f"epsilon0 must lie in [0, 1], got {self.epsilon0}")
        if self.warmup < 1 or self.update_interval < 1 or self.n_trees < 1:
            raise ValueError("warmup, update_interval and n_trees must be positive")

    def regressor(self, seed: int) -> RegressorSpec:
        return RegressorSpec(kind="forest", n_trees=self.n_trees, max_depth=self.max_depth,
                             min_leaf=self.min_leaf, seed=seed)


@dataclass(frozen=True)
class Buffer:
    """Column store of transitions ``(position, tick, action, reward, next_position)``."""

    positions: np.ndarray
    ticks: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_positions: np.ndarray

    @classmethod
    def from_transitions(cls, transitions) -> "Buffer":
        transitions = list(transitions)
        cols = list(zip(*[(t.position, t.tick, t.action, t.reward, t.next_position)
                          for t in transitions])) if transitions else [()] * 5
        return cls(np.asarray(cols[0], dtype=np.int64), np.asarray(cols[1], dtype=np.int64),
                   np.asarray(cols[2], dtype=np.int64), np.asarray(cols[3], dtype=np.float64),
                   np.asarray(cols[4], dtype=np.int64))

    def __len__(self) -> int:
        return len(self.rewards)


def q_features(embed_cfg: EmbeddingConfig, positions, actions, ticks, time_aware: bool) -> np.ndarray:
    positions = np.atleast_1d(np.asarray(positions))
    actions = np.atleast_1d(np.asarray(actions))
    act = np.zeros((len(actions), len(ACTIONS)))
    act[np.arange(len(actions)), actions + 1] = 1.0
    parts = [embed_position(embed_cfg, positions), act]
    if time_aware:
        parts.append(embed_time(embed_cfg, np.atleast_1d(np.asarray(ticks))))
    return np.hstack(parts)


@dataclass(frozen=True)
class QModel:
    regressor: TrainedRegressor | None  # None is the all-zero initial iterate
    embed_cfg: EmbeddingConfig
    time_aware: bool
    actions: tuple = ACTIONS

    def q_values(self, positions, ticks) -> np.ndarray:
        """``(n, 3)`` action values; ``-inf`` marks moves that leave the track."""
        positions = np.atleast_1d(np.asarray(positions, dtype=np.int64))
        ticks = np.atleast_1d(np.asarray(ticks, dtype=np.int64))
        n = len(positions)
        out = np.zeros((n, len(ACTIONS)))
        if self.regressor is not None:
            pos = np.repeat(positions, len(ACTIONS))
            act = np.tile(np.asarray(ACTIONS), n)
            tck = np.repeat(ticks, len(ACTIONS))
            X = q_features(self.embed_cfg, pos, act, tck, self.time_aware)
            out = self.regressor.predict(X).reshape(n, len(ACTIONS))
        nxt = positions[:, None] + np.asarray(ACTIONS)[None, :]
        return np.where((nxt >= 0) & (nxt < self.embed_cfg.width), out, -np.inf)

    def greedy(self, position: int, tick: int, rng: np.random.Generator | None = None) -> int:
        """Highest-valued legal move.  Exact ties go to the first move, or to a uniform draw
        among the tied moves when ``rng`` is given."""
        q = self.q_values([position], [tick])[0]
        if rng is None:
            return ACTIONS[first_argmax(q)]
        best = np.flatnonzero(q == q.max())
        return ACTIONS[int(best[rng.integers(len(best))]) if len(best) > 1 else int(best[0])]


def zero_q(embed_cfg: EmbeddingConfig, time_aware: bool) -> QModel:
    return QModel(None, embed_cfg, time_aware)


def fqi_targets(buffer: Buffer, q: QModel, gamma: float, time_aware: bool | None = None) -> Dataset:
    """Rows ``(s_t, a_t[, t]) -> r_t + gamma * max_a' Q(s_{t+1}, a'[, t + 1])``."""
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    time_aware = q.time_aware if time_aware is None else time_aware
    X = q_features(q.embed_cfg, buffer.positions, buffer.actions, buffer.ticks, time_aware)
    if q.regressor is None:
        return Dataset(X, buffer.rewards.copy())
    nxt = q.q_values(buffer.next_positions, buffer.ticks + 1).max(axis=1)
    return Dataset(X, buffer.rewards + gamma * nxt)


def fqi_fit(buffer: Buffer, cfg: FQIConfig, embed_cfg: EmbeddingConfig, seed: int = 0,
            q_init: QModel | None = None) -> QModel:
    """``cfg.iterations`` rounds of target construction and forest refit."""
    if len(buffer) == 0:
        raise ValueError("empty buffer")
    q = q_init if q_init is not None else zero_q(embed_cfg, cfg.time_aware)
    spec = cfg.regressor(seed)
    for _ in range(cfg.iterations):
        data = fqi_targets(buffer, q, cfg.gamma, cfg.time_aware)
        q = QModel(fit(spec, data), embed_cfg, cfg.time_aware)
    return q


def epsilon_at(epsilon0: float, t: int) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return max(EPSILON_FLOOR, epsilon0 * EPSILON_DECAY ** t)


@dataclass
class FQIRun:
    trajectory: Trajectory
    explored: list = field(default_factory=list)
    refit_steps: list = field(default_factory=list)
    q: QModel | None = None


def run_online_fqi(env: EnvConfig, cfg: FQIConfig, embed_cfg: EmbeddingConfig, total_steps: int,
                   rng: np.random.Generator, seed: int = 0) -> FQIRun:
    """Epsilon-greedy interaction; the Q-function is refitted whenever the buffer holds at
    least ``warmup`` transitions and ``(t + 1) % update_interval == 0`` (``t`` counted from 1).
    """
    if total_steps <= cfg.warmup:
        raise ValueError(f"total_steps ({total_steps}) must exceed warmup ({cfg.warmup})")
    start = env.width // 2 if cfg.start_position is None else cfg.start_position
    traj = Trajectory(EnvState(int(start), 0))
    out = FQIRun(traj)
    state = traj.start
    q = None
    for t in range(1, total_steps + 1):
        legal = legal_actions(env, state.position)
        explore = q is None or rng.uniform() < epsilon_at(cfg.epsilon0, t)
        if explore:
            action = legal[int(rng.integers(len(legal)))]
        else:
            action = q.greedy(state.position, state.tick, rng if cfg.random_ties else None)
        tr = step(env, state, action)
        traj.transitions.append(tr)
        out.explored.append(bool(explore))
        state = EnvState(tr.next_position, tr.next_tick)
        if len(traj) >= cfg.warmup and (t + 1) % cfg.update_interval == 0:
            buffer = Buffer.from_transitions(traj.transitions)
            q = fqi_fit(buffer, cfg, embed_cfg, seed, q if cfg.warm_start_q else None)
            out.refit_steps.append(t)
    out.q = q
    return out
