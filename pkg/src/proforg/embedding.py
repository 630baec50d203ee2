"""State features: position indicator concatenated with a sinusoidal time code.

Time slot ``i`` holds ``sin(t / base^(2 floor(i/2) / d))`` for even ``i`` and the
matching cosine for odd ``i``.  Left unset, the base is chosen so that the
second sine/cosine pair repeats exactly once per reward period; with the
transformer-style base of 10000 no slot shares the reward's period and tree
learners cannot carry the schedule forward to unseen ticks.  Periods shorter
than ``2 pi`` cannot be anchored this way (the base would drop below 1) and
fall back to 10000.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EmbeddingConfig:
    width: int = 7
    time_dim: int = 50
    frequency_base: float | None = None  # None: anchored to ``period``
    period: int = 10
    position_mode: str = "onehot"

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be positive, got {self.width}")
        if self.time_dim < 2 or self.time_dim % 2:
            raise ValueError(f"time_dim must be a positive even integer, got {self.time_dim}")
        if not self.base > 1:
            raise ValueError(f"frequency base must exceed 1, got {self.base}")
        if self.position_mode not in ("onehot", "scalar"):
            raise ValueError(f"unknown position_mode {self.position_mode!r}")

    @property
    def base(self) -> float:
        if self.frequency_base is not None:
            return float(self.frequency_base)
        if self.period <= 2.0 * np.pi:
            return 10000.0
        return float((self.period / (2.0 * np.pi)) ** (self.time_dim / 2))

    @property
    def position_dim(self) -> int:
        return self.width if self.position_mode == "onehot" else 1

    @property
    def dim(self) -> int:
        return self.position_dim + self.time_dim

    @property
    def frequencies(self) -> np.ndarray:
        i = np.arange(self.time_dim)
        return self.base ** (-2.0 * (i // 2) / self.time_dim)


def embed_time(cfg: EmbeddingConfig, ticks) -> np.ndarray:
    """Sinusoidal code of shape ``(len(ticks), time_dim)``: sin on even, cos on odd slots."""
    ticks = np.atleast_1d(np.asarray(ticks, dtype=np.float64))
    angles = ticks[:, None] * cfg.frequencies[None, :]
    out = np.empty_like(angles)
    out[:, 0::2] = np.sin(angles[:, 0::2])
    out[:, 1::2] = np.cos(angles[:, 1::2])
    return out


def embed_position(cfg: EmbeddingConfig, positions) -> np.ndarray:
    positions = np.atleast_1d(np.asarray(positions, dtype=np.int64))
    if positions.size and (positions.min() < 0 or positions.max() >= cfg.width):
        raise IndexError(f"position outside track [0, {cfg.width})")
    if cfg.position_mode == "scalar":
        return positions[:, None].astype(np.float64)
    out = np.zeros((len(positions), cfg.width))
    out[np.arange(len(positions)), positions] = 1.0
    return out


def embed_many(cfg: EmbeddingConfig, positions, ticks) -> np.ndarray:
    """Row-wise ``embed`` over matching position / tick arrays."""
    positions = np.atleast_1d(np.asarray(positions))
    ticks = np.atleast_1d(np.asarray(ticks))
    if positions.shape != ticks.shape:
        raise ValueError("positions and ticks must have matching shapes")
    return np.hstack([embed_position(cfg, positions), embed_time(cfg, ticks)])


def embed(cfg: EmbeddingConfig, position: int, tick: int) -> np.ndarray:
    return embed_many(cfg, [position], [tick])[0]
