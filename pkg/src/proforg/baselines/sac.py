"""Online soft actor-critic for the three-move action space.

The actor emits logits over {-1, 0, +1}; illegal moves are masked out of the
softmax.  Each critic maps a state to one value per move.  Critic targets
follow the sampled form ``r + gamma * (min_i Q_targ_i(s', a') - alpha log pi(a'|s'))``
with ``a' ~ pi(.|s')``; set ``target_expectation`` to average over ``a'`` instead.
The actor ascends ``E_{a~pi}[min_i Q_targ_i(s, a) - alpha log pi(a|s)]``, computed
exactly over the three moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..embedding import EmbeddingConfig, embed_position, embed_time
from ..env import ACTIONS, EnvConfig, EnvState, Trajectory, step
from ..learners import Adam, Network


@dataclass(frozen=True)
class SACConfig:
    hidden: tuple = (128, 128)
    alpha: float = 0.2
    rho: float = 0.995
    batch_size: int = 64
    actor_lr: float = 1e-3
    critic_lr: float = 1e-3
    gamma: float = 0.9
    time_aware: bool = True
    target_expectation: bool = False
    start_position: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")


def state_features(embed_cfg: EmbeddingConfig, positions, ticks, time_aware: bool) -> np.ndarray:
    parts = [embed_position(embed_cfg, positions)]
    if time_aware:
        parts.append(embed_time(embed_cfg, ticks))
    return np.hstack(parts)


def legal_mask(width: int, positions) -> np.ndarray:
    nxt = np.asarray(positions)[:, None] + np.asarray(ACTIONS)[None, :]
    return (nxt >= 0) & (nxt < width)


def masked_softmax(logits: np.ndarray, mask: np.ndarray):
    """Returns ``(probs, log_probs)``; masked entries get probability 0 and log-prob 0."""
    z = np.where(mask, logits, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(z), 0.0)
    probs = e / e.sum(axis=1, keepdims=True)
    logp = np.where(mask, z - np.log(e.sum(axis=1, keepdims=True)), 0.0)
    return probs, logp


class SACAgent:
    def __init__(self, env: EnvConfig, cfg: SACConfig, embed_cfg: EmbeddingConfig,
                 rng: np.random.Generator):
        self.env = env
        self.cfg = cfg
        self.embed_cfg = embed_cfg
        self.rng = rng
        dim = embed_cfg.position_dim + (embed_cfg.time_dim if cfg.time_aware else 0)
        sizes = [dim, *cfg.hidden, len(ACTIONS)]
        self.actor = Network.init(sizes, rng)
        self.critics = [Network.init(sizes, rng), Network.init(sizes, rng)]
        self.targets = [c.copy() for c in self.critics]
        self.actor_opt = Adam(self.actor, cfg.actor_lr)
        self.critic_opts = [Adam(c, cfg.critic_lr) for c in self.critics]

    def features(self, positions, ticks) -> np.ndarray:
        return state_features(self.embed_cfg, np.atleast_1d(positions), np.atleast_1d(ticks),
                              self.cfg.time_aware)

    def policy(self, positions, ticks):
        positions = np.atleast_1d(np.asarray(positions))
        logits = self.actor.forward(self.features(positions, ticks))
        return masked_softmax(logits, legal_mask(self.env.width, positions))

    def sample(self, probs: np.ndarray) -> np.ndarray:
        """One action index per row, by inverse-CDF on a single uniform draw."""
        u = self.rng.uniform(size=(len(probs), 1))
        idx = (np.cumsum(probs, axis=1) < u).sum(axis=1)
        return np.minimum(idx, len(ACTIONS) - 1)

    def act(self, position: int, tick: int) -> int:
        probs, _ = self.policy([position], [tick])
        return ACTIONS[int(self.sample(probs)[0])]

    def greedy(self, position: int, tick: int) -> int:
        probs, _ = self.policy([position], [tick])
        return ACTIONS[int(np.argmax(probs[0]))]

    def update(self, pos, tick, act_idx, rew, nxt_pos) -> dict:
        cfg = self.cfg
        n = len(pos)
        rows = np.arange(n)
        # critic targets
        x_next = self.features(nxt_pos, tick + 1)
        probs_n, logp_n = masked_softmax(self.actor.forward(x_next),
                                         legal_mask(self.env.width, nxt_pos))
        q_next = np.minimum(self.targets[0].forward(x_next), self.targets[1].forward(x_next))
        if cfg.target_expectation:
            soft = np.where(probs_n > 0, probs_n * (q_next - cfg.alpha * logp_n), 0.0).sum(axis=1)
        else:
            a_n = self.sample(probs_n)
            soft = q_next[rows, a_n] - cfg.alpha * logp_n[rows, a_n]
        y = rew + cfg.gamma * soft

        x = self.features(pos, tick)
        losses = []
        for critic, opt in zip(self.critics, self.critic_opts):
            out, acts = critic.forward(x, keep=True)
            err = out[rows, act_idx] - y
            grad_out = np.zeros_like(out)
            grad_out[rows, act_idx] = 2.0 * err / n
            grads = critic.backward(acts, grad_out)
            opt.update(critic, np.concatenate([g.ravel() for g in grads]))
            losses.append(float(np.mean(err ** 2)))

        # actor: maximise E_pi[min Q_targ - alpha log pi] over legal moves
        logits, acts = self.actor.forward(x, keep=True)
        probs, logp = masked_softmax(logits, legal_mask(self.env.width, pos))
        q = np.minimum(self.targets[0].forward(x), self.targets[1].forward(x))
        inner = np.where(probs > 0, q - cfg.alpha * logp, 0.0)
        objective = (probs * inner).sum(axis=1, keepdims=True)
        d_logits = probs * (inner - objective)
        grads = self.actor.backward(acts, -d_logits / n)
        self.actor_opt.update(self.actor, np.concatenate([g.ravel() for g in grads]))

        for target, critic in zip(self.targets, self.critics):
            target.polyak_from(critic, cfg.rho)
        return {"critic_loss": losses, "actor_objective": float(objective.mean())}


@dataclass
class SACRun:
    trajectory: Trajectory
    agent: SACAgent
    updates: int = 0
    log: list = field(default_factory=list)


def run_online_sac(env: EnvConfig, cfg: SACConfig, embed_cfg: EmbeddingConfig, total_steps: int,
                   rng: np.random.Generator) -> SACRun:
    """Act from the current policy every tick; one gradient update per tick once the buffer
    holds a full batch."""
    if total_steps <= cfg.batch_size:
        raise ValueError(f"total_steps ({total_steps}) must exceed batch_size ({cfg.batch_size})")
    agent = SACAgent(env, cfg, embed_cfg, rng)
    start = env.width // 2 if cfg.start_position is None else cfg.start_position
    traj = Trajectory(EnvState(int(start), 0))
    out = SACRun(traj, agent)
    buf = np.zeros((total_steps, 5))  # position, tick, action index, reward, next position
    state = traj.start
    for t in range(total_steps):
        action = agent.act(state.position, state.tick)
        tr = step(env, state, action)
        traj.transitions.append(tr)
        buf[t] = (tr.position, tr.tick, tr.action + 1, tr.reward, tr.next_position)
        state = EnvState(tr.next_position, tr.next_tick)
        if t + 1 >= cfg.batch_size:
            idx = rng.integers(0, t + 1, cfg.batch_size)
            b = buf[idx]
            agent.update(b[:, 0].astype(np.int64), b[:, 1].astype(np.int64),
                         b[:, 2].astype(np.int64), b[:, 3], b[:, 4].astype(np.int64))
            out.updates += 1
    return out
