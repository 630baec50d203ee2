"""One-dimensional foraging track with two periodic, decaying reward patches.

The reward field is a closed-form function of time only: patch A is boosted to
1 at every multiple of the period and decays as ``exp(-phase / tau)``; patch B
follows the same law shifted by half a period.  All other cells never pay.

The agent is paid at the *arrival* tick at the *arrival* cell: stepping from
``(x, t)`` to ``(x', t + 1)`` yields ``reward_field(cfg, t + 1)[x']``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ACTIONS: tuple[int, ...] = (-1, 0, 1)


class IllegalMoveError(ValueError):
    """An action would move the agent off the track."""

    def __init__(self, position: int, action: int, tick: int | None = None):
        self.position = position
        self.action = action
        self.tick = tick
        where = f" at tick {tick}" if tick is not None else ""
        super().__init__(f"illegal move {action:+d} from cell {position}{where}")


@dataclass(frozen=True)
class EnvConfig:
    width: int = 7
    patch_a: int = 2
    patch_b: int = 5
    period: int = 10
    tau: float = 2.0
    gamma: float = 0.9

    def __post_init__(self):
        if self.width < 2:
            raise ValueError(f"width must be >= 2, got {self.width}")
        if not 0 <= self.patch_a < self.patch_b < self.width:
            raise ValueError(
                f"need 0 <= patch_a < patch_b < width, got "
                f"{self.patch_a}, {self.patch_b}, {self.width}"
            )
        if self.period < 2 or self.period % 2:
            raise ValueError(f"period must be a positive even integer, got {self.period}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")


@dataclass(frozen=True)
class EnvState:
    position: int
    tick: int = 0


@dataclass(frozen=True)
class Transition:
    position: int
    tick: int
    action: int
    next_position: int
    reward: float

    @property
    def next_tick(self) -> int:
        return self.tick + 1


@dataclass
class Trajectory:
    start: EnvState
    transitions: list[Transition] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def end(self) -> EnvState:
        if not self.transitions:
            return self.start
        last = self.transitions[-1]
        return EnvState(last.next_position, last.next_tick)

    def append(self, tr: Transition) -> None:
        end = self.end
        if (tr.position, tr.tick) != (end.position, end.tick):
            raise ValueError(
                f"transition from ({tr.position}, {tr.tick}) does not chain onto "
                f"({end.position}, {end.tick})"
            )
        self.transitions.append(tr)

    def positions(self) -> np.ndarray:
        """Visited cells, starting cell included (length ``len(self) + 1``)."""
        out = [self.start.position]
        out.extend(tr.next_position for tr in self.transitions)
        return np.asarray(out, dtype=np.int64)

    def rewards(self) -> np.ndarray:
        return np.asarray([tr.reward for tr in self.transitions], dtype=np.float64)

    def actions(self) -> np.ndarray:
        return np.asarray([tr.action for tr in self.transitions], dtype=np.int64)


def patch_rewards(cfg: EnvConfig, tick) -> tuple:
    """Return ``(y(A), y(B))`` at ``tick`` (scalar or integer array)."""
    tick = np.asarray(tick, dtype=np.int64)
    ya = np.exp(-np.mod(tick, cfg.period) / cfg.tau)
    yb = np.exp(-np.mod(tick + cfg.period // 2, cfg.period) / cfg.tau)
    return ya, yb


def reward_field(cfg: EnvConfig, tick: int) -> np.ndarray:
    if tick < 0:
        raise ValueError(f"tick must be non-negative, got {tick}")
    y = np.zeros(cfg.width)
    ya, yb = patch_rewards(cfg, tick)
    y[cfg.patch_a] = ya
    y[cfg.patch_b] = yb
    return y


def reward_at(cfg: EnvConfig, position, tick) -> np.ndarray | float:
    """Vectorised ``reward_field(cfg, tick)[position]``."""
    position = np.asarray(position)
    ya, yb = patch_rewards(cfg, tick)
    out = np.where(position == cfg.patch_a, ya, 0.0) + np.where(
        position == cfg.patch_b, yb, 0.0
    )
    return out if out.ndim else float(out)


def reward_table(cfg: EnvConfig) -> np.ndarray:
    """``(period, width)`` array; row ``k`` is the field at any tick with phase ``k``."""
    return np.stack([reward_field(cfg, k) for k in range(cfg.period)])


def _check_position(cfg: EnvConfig, position: int) -> None:
    if not 0 <= position < cfg.width:
        raise IndexError(f"position {position} outside track [0, {cfg.width})")


def legal_actions(cfg: EnvConfig, position: int) -> tuple[int, ...]:
    _check_position(cfg, position)
    return tuple(a for a in ACTIONS if 0 <= position + a < cfg.width)


def step(cfg: EnvConfig, state: EnvState, action: int) -> Transition:
    _check_position(cfg, state.position)
    nxt = state.position + int(action)
    if action not in ACTIONS or not 0 <= nxt < cfg.width:
        raise IllegalMoveError(state.position, action, state.tick)
    reward = float(reward_at(cfg, nxt, state.tick + 1))
    return Transition(state.position, state.tick, int(action), nxt, reward)


Policy = Callable[[int, int], int]


def run_policy(cfg: EnvConfig, policy: Policy, start: EnvState, horizon: int) -> Trajectory:
    """Roll ``policy(position, tick) -> action`` forward for ``horizon`` steps."""
    if horizon < 0:
        raise ValueError(f"horizon must be non-negative, got {horizon}")
    traj = Trajectory(start)
    state = start
    for _ in range(horizon):
        tr = step(cfg, state, policy(state.position, state.tick))
        traj.transitions.append(tr)
        state = EnvState(tr.next_position, tr.next_tick)
    return traj


def discounted_return(rewards, gamma: float) -> float:
    rewards = np.asarray(rewards, dtype=np.float64)
    return float(np.sum(rewards * gamma ** np.arange(len(rewards))))
