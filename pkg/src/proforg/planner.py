"""Receding-horizon foraging planner driven by two supervised regressors.

One regressor predicts the reward collected on arrival at ``(position, tick)``,
the other the discounted reward still to come after that state.  At every tick
all legal ``H``-step paths are enumerated and scored by

    sum_h gamma^(h-1) * inst(x_h, s + h)  +  gamma^H * term(x_H, s + H)

and only the first move of the best path is executed.  Positions the agent
never visited are scored by the instantaneous regressor's prediction, so
counterfactual rewards are never written into the training data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .embedding import EmbeddingConfig, embed_many
from .env import ACTIONS, EnvConfig, EnvState, Trajectory, legal_actions, step
from .learners import Dataset, RegressorSpec, TrainedRegressor, refit_all
from .oracle import TIE_TOL

VARIANTS = ("full", "instantaneous_only", "terminal_only")
MODES = ("online", "offline")

# (positions, ticks) -> predicted values, both int arrays of equal shape
ValueFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 6
    gamma: float = 0.9
    warmup_steps: int = 200
    variant: str = "full"
    mode: str = "online"
    refit_interval: int = 1
    label_horizon: int | None = None  # None: derived from gamma (1% truncation error)
    actions: tuple = ACTIONS
    start_position: int | None = None  # None: centre cell

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.warmup_steps < 2:
            raise ValueError(f"warmup_steps must be >= 2, got {self.warmup_steps}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.refit_interval < 1:
            raise ValueError("refit_interval must be >= 1")
        if self.label_horizon is not None and self.label_horizon < 1:
            raise ValueError("label_horizon must be positive")
        acts = tuple(int(a) for a in self.actions)
        if not acts or any(a not in ACTIONS for a in acts) or len(set(acts)) != len(acts):
            raise ValueError(f"actions must be distinct members of {ACTIONS}, got {self.actions}")
        object.__setattr__(self, "actions", tuple(a for a in ACTIONS if a in acts))

    @property
    def min_future_steps(self) -> int:
        """Future rewards a state needs before its cumulative label is trusted."""
        if self.label_horizon is not None:
            return self.label_horizon
        if self.gamma == 0.0:
            return 1
        return max(1, math.ceil(math.log(0.01 * (1.0 - self.gamma)) / math.log(self.gamma)))


# ---------------------------------------------------------------- labels


def discounted_labels(rewards: Sequence[float], gamma: float) -> np.ndarray:
    """``out[s] = sum_{t > s} gamma^(t - s - 1) * rewards[t]``; the last label is 0."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.zeros(len(rewards))
    acc = 0.0
    for s in range(len(rewards) - 2, -1, -1):
        acc = rewards[s + 1] + gamma * acc
        out[s] = acc
    return out


@dataclass
class LabeledHistory:
    """Visited states ``(x_s, s)`` with arrival rewards and discounted labels.

    ``rewards[k]`` is paid on arrival at state ``k``; the start state's entry is
    never used for training because nothing was observed on arriving there.
    """

    positions: list
    ticks: list
    rewards: list

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> "LabeledHistory":
        h = cls([traj.start.position], [traj.start.tick], [0.0])
        for tr in traj.transitions:
            h.add(tr.next_position, tr.next_tick, tr.reward)
        return h

    def add(self, position: int, tick: int, reward: float) -> None:
        self.positions.append(int(position))
        self.ticks.append(int(tick))
        self.rewards.append(float(reward))

    def __len__(self) -> int:
        return len(self.positions)

    def instantaneous(self, embed_cfg: EmbeddingConfig) -> Dataset:
        X = embed_many(embed_cfg, self.positions[1:], self.ticks[1:])
        return Dataset(X, np.asarray(self.rewards[1:]))

    def cumulative_labels(self, gamma: float) -> np.ndarray:
        return discounted_labels(self.rewards, gamma)

    def cumulative(self, embed_cfg: EmbeddingConfig, gamma: float, min_future: int) -> Dataset | None:
        """Rows with at least ``min_future`` observed future rewards, or None if there are none."""
        n = len(self) - min_future
        if n < 1:
            return None
        labels = self.cumulative_labels(gamma)[:n]
        X = embed_many(embed_cfg, self.positions[:n], self.ticks[:n])
        return Dataset(X, labels)


# ---------------------------------------------------------------- value functions


class FeatureModel:
    """Adapts a trained regressor on embedded states to a ``(positions, ticks)`` function."""

    def __init__(self, model: TrainedRegressor, embed_cfg: EmbeddingConfig):
        if model.dim != embed_cfg.dim:
            raise ValueError(
                f"regressor trained on {model.dim} features but the embedding has {embed_cfg.dim}"
            )
        self.model = model
        self.embed_cfg = embed_cfg

    def __call__(self, positions, ticks) -> np.ndarray:
        positions = np.asarray(positions)
        X = embed_many(self.embed_cfg, positions.ravel(), np.asarray(ticks).ravel())
        return self.model.predict(X).reshape(positions.shape)


def constant_value(c: float = 0.0) -> ValueFn:
    def fn(positions, ticks):
        return np.full(np.shape(positions), float(c))
    return fn


# ---------------------------------------------------------------- search


def all_paths(cfg: EnvConfig, position: int, H: int, actions: Sequence[int] = ACTIONS) -> np.ndarray:
    """Every legal ``H``-step position sequence leaving ``position`` (excluded), shape ``(n, H)``.

    Paths are in lexicographic action order (-1 before 0 before +1, first move most significant).
    """
    if H < 1:
        raise ValueError(f"horizon must be >= 1, got {H}")
    legal_actions(cfg, position)
    acts = [a for a in ACTIONS if a in actions]
    paths = [()]
    last = [position]
    for _ in range(H):
        new_paths, new_last = [], []
        for path, p in zip(paths, last):
            for a in acts:
                q = p + a
                if 0 <= q < cfg.width:
                    new_paths.append(path + (q,))
                    new_last.append(q)
        paths, last = new_paths, new_last
    return np.asarray(paths, dtype=np.int64).reshape(len(paths), H)


def _term_weights(gamma: float, H: int, variant: str):
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    inst = gamma ** np.arange(H) if variant != "terminal_only" else np.zeros(H)
    term = gamma ** H if variant != "instantaneous_only" else 0.0
    return inst, term


def score_paths(paths: np.ndarray, inst: ValueFn, term: ValueFn, gamma: float, tick: int,
                variant: str = "full") -> np.ndarray:
    """Vectorised path scores; each model is queried once per distinct ``(position, tick)``."""
    paths = np.asarray(paths, dtype=np.int64)
    n, H = paths.shape
    w_inst, w_term = _term_weights(gamma, H, variant)
    scores = np.zeros(n)
    if variant != "terminal_only":
        cells = np.unique(paths)
        ticks = tick + 1 + np.arange(H)
        grid_p, grid_t = np.meshgrid(cells, ticks, indexing="ij")
        table = np.asarray(inst(grid_p, grid_t), dtype=np.float64)
        col = np.searchsorted(cells, paths)
        scores += (table[col, np.arange(H)[None, :]] * w_inst[None, :]).sum(axis=1)
    if variant != "instantaneous_only":
        ends = np.unique(paths[:, -1])
        tvals = np.asarray(term(ends, np.full(len(ends), tick + H)), dtype=np.float64)
        scores += w_term * tvals[np.searchsorted(ends, paths[:, -1])]
    return scores


def score_path(path, inst: ValueFn, term: ValueFn, gamma: float, tick: int,
               variant: str = "full") -> float:
    """Score of one path; the path's first entry is the position at ``tick + 1``."""
    path = np.asarray(path, dtype=np.int64)
    H = len(path)
    w_inst, w_term = _term_weights(gamma, H, variant)
    total = 0.0
    if variant != "terminal_only":
        ticks = tick + 1 + np.arange(H)
        total += float(np.sum(w_inst * np.asarray(inst(path, ticks), dtype=np.float64)))
    if variant != "instantaneous_only":
        total += w_term * float(np.asarray(term(path[-1:], np.array([tick + H])))[0])
    return total


@dataclass(frozen=True)
class Decision:
    next_position: int
    action: int
    path: np.ndarray
    score: float


def select_action(cfg: EnvConfig, state: EnvState, inst: ValueFn, term: ValueFn,
                  planner_cfg: PlannerConfig) -> Decision:
    """Best path's first move; near-ties go to the earliest path in enumeration order."""
    paths = all_paths(cfg, state.position, planner_cfg.horizon, planner_cfg.actions)
    if len(paths) == 0:
        raise ValueError(f"no legal path from cell {state.position} with actions "
                         f"{planner_cfg.actions}")
    scores = score_paths(paths, inst, term, planner_cfg.gamma, state.tick, planner_cfg.variant)
    best = scores.max()
    k = int(np.flatnonzero(scores >= best - TIE_TOL * max(1.0, abs(best)))[0])
    nxt = int(paths[k, 0])
    return Decision(nxt, nxt - state.position, paths[k], float(scores[k]))


# ---------------------------------------------------------------- training loop


@dataclass
class Models:
    inst: ValueFn
    term: ValueFn
    inst_model: TrainedRegressor | None = None
    term_model: TrainedRegressor | None = None


def fit_models(history: LabeledHistory, planner_cfg: PlannerConfig, embed_cfg: EmbeddingConfig,
               spec: RegressorSpec) -> Models:
    """Full refit of whichever regressors the variant actually scores with."""
    models = Models(constant_value(0.0), constant_value(0.0))
    if planner_cfg.variant != "terminal_only":
        m = refit_all(spec, history.instantaneous(embed_cfg))
        models.inst, models.inst_model = FeatureModel(m, embed_cfg), m
    if planner_cfg.variant != "instantaneous_only":
        data = history.cumulative(embed_cfg, planner_cfg.gamma, planner_cfg.min_future_steps)
        if data is not None:
            m = refit_all(spec, data)
            models.term, models.term_model = FeatureModel(m, embed_cfg), m
    return models


def _start_state(cfg: EnvConfig, planner_cfg: PlannerConfig) -> EnvState:
    pos = cfg.width // 2 if planner_cfg.start_position is None else planner_cfg.start_position
    legal_actions(cfg, pos)
    return EnvState(int(pos), 0)


def random_step(cfg: EnvConfig, state: EnvState, rng: np.random.Generator, actions=ACTIONS):
    legal = [a for a in legal_actions(cfg, state.position) if a in actions]
    return step(cfg, state, legal[int(rng.integers(len(legal)))])


def warm_start(cfg: EnvConfig, planner_cfg: PlannerConfig, embed_cfg: EmbeddingConfig,
               spec: RegressorSpec, rng: np.random.Generator):
    """Uniform-random exploration for ``warmup_steps`` ticks, then a batch fit.

    Returns ``(trajectory, history, models)``.
    """
    traj = Trajectory(_start_state(cfg, planner_cfg))
    state = traj.start
    for _ in range(planner_cfg.warmup_steps):
        tr = random_step(cfg, state, rng, planner_cfg.actions)
        traj.transitions.append(tr)
        state = EnvState(tr.next_position, tr.next_tick)
    history = LabeledHistory.from_trajectory(traj)
    return traj, history, fit_models(history, planner_cfg, embed_cfg, spec)


@dataclass
class PlannerRun:
    trajectory: Trajectory
    warmup_steps: int
    scores: list = field(default_factory=list)  # chosen-path score per online step (NaN if random)
    greedy_rollouts: dict = field(default_factory=dict)  # online step -> positions (offline mode)


def greedy_rollout(cfg: EnvConfig, start: EnvState, models: Models, planner_cfg: PlannerConfig,
                   T: int) -> np.ndarray:
    """Positions visited by the frozen planner over ``T`` steps (``T + 1`` entries)."""
    out = [start.position]
    state = start
    for _ in range(T):
        d = select_action(cfg, state, models.inst, models.term, planner_cfg)
        state = EnvState(d.next_position, state.tick + 1)
        out.append(state.position)
    return np.asarray(out, dtype=np.int64)


def run(cfg: EnvConfig, planner_cfg: PlannerConfig, embed_cfg: EmbeddingConfig,
        spec: RegressorSpec, online_steps: int, rng: np.random.Generator,
        eval_every: int = 1, eval_window: int = 20, callback=None) -> PlannerRun:
    """Warm start followed by ``online_steps`` planning (or random, offline) steps.

    In offline mode the behaviour is uniform-random while the regressors are
    refitted on the same cadence; every ``eval_every`` steps the frozen greedy
    planner is rolled out for ``eval_window`` ticks from the current state.
    """
    if online_steps < 0:
        raise ValueError("online_steps must be non-negative")
    traj, history, models = warm_start(cfg, planner_cfg, embed_cfg, spec, rng)
    result = PlannerRun(traj, planner_cfg.warmup_steps)
    state = traj.end
    for k in range(online_steps + 1):
        if planner_cfg.mode == "offline" and k % eval_every == 0:
            result.greedy_rollouts[k] = greedy_rollout(cfg, state, models, planner_cfg, eval_window)
        if k == online_steps:
            break
        if planner_cfg.mode == "online":
            d = select_action(cfg, state, models.inst, models.term, planner_cfg)
            tr = step(cfg, state, d.action)
            result.scores.append(d.score)
        else:
            tr = random_step(cfg, state, rng, planner_cfg.actions)
            result.scores.append(float("nan"))
        traj.transitions.append(tr)
        history.add(tr.next_position, tr.next_tick, tr.reward)
        state = EnvState(tr.next_position, tr.next_tick)
        if (k + 1) % planner_cfg.refit_interval == 0:
            models = fit_models(history, planner_cfg, embed_cfg, spec)
        if callback is not None:
            callback(k, tr, models)
    return result


def with_variant(planner_cfg: PlannerConfig, **changes) -> PlannerConfig:
    return replace(planner_cfg, **changes)
