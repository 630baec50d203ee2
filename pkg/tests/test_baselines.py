import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proforg.baselines import (
    Buffer,
    FQIConfig,
    QModel,
    SACAgent,
    SACConfig,
    epsilon_at,
    fqi_fit,
    fqi_targets,
    masked_softmax,
    q_features,
    run_online_fqi,
    run_online_sac,
    zero_q,
)
from proforg.embedding import EmbeddingConfig
from proforg.env import ACTIONS, EnvConfig, EnvState, Transition, legal_actions, step
from proforg.learners import Dataset, RegressorSpec, fit
from proforg.oracle import normalized_regret, prospective_regret, solve
from proforg.planner import random_step

EMB = EmbeddingConfig()


def random_buffer(cfg, n, seed, start=3):
    rng = np.random.default_rng(seed)
    s, out = EnvState(start, 0), []
    for _ in range(n):
        tr = random_step(cfg, s, rng)
        out.append(tr)
        s = EnvState(tr.next_position, tr.next_tick)
    return Buffer.from_transitions(out)


def constant_q(c, time_aware=True):
    X = q_features(EMB, [0, 1], [0, 1], [0, 1], time_aware)
    model = fit(RegressorSpec(n_trees=1, bootstrap=False), Dataset(X, np.full(2, float(c))))
    return QModel(model, EMB, time_aware)


# ------------------------------------------------------------------ FQI


def test_targets_with_zero_q_are_rewards(env_cfg):
    buf = random_buffer(env_cfg, 50, 0)
    data = fqi_targets(buf, zero_q(EMB, True), 0.9)
    assert np.array_equal(data.y, buf.rewards)
    assert data.X.shape == (50, 7 + 3 + 50)


def test_single_transition_target():
    buf = Buffer.from_transitions([Transition(3, 0, 0, 3, 1.0)])
    assert fqi_targets(buf, constant_q(2.0), 0.5).y.tolist() == [2.0]


def test_targets_use_next_tick(env_cfg):
    """The bootstrap term reads Q at the successor's tick."""
    def table_q(p, t):
        return np.where(np.asarray(t) == 8, 5.0, 0.0)

    class Probe(QModel):
        def q_values(self, positions, ticks):
            return np.tile(table_q(positions, ticks)[:, None], (1, 3))

    q = Probe(constant_q(0.0).regressor, EMB, True)
    buf = Buffer.from_transitions([Transition(3, 7, 0, 3, 0.0)])
    assert fqi_targets(buf, q, 0.9).y.tolist() == [4.5]


def test_fit_rejects_empty_buffer():
    with pytest.raises(ValueError):
        fqi_fit(Buffer.from_transitions([]), FQIConfig(n_trees=2), EMB)


def test_zero_reward_buffer_gives_zero_q(env_cfg):
    buf = random_buffer(env_cfg, 40, 1)
    buf = Buffer(buf.positions, buf.ticks, buf.actions, np.zeros(40), buf.next_positions)
    q = fqi_fit(buf, FQIConfig(iterations=1, n_trees=3), EMB)
    assert np.all(q.q_values(np.arange(7), np.full(7, 999))[np.isfinite(q.q_values(np.arange(7), np.full(7, 999)))] == 0)


def _frozen_buffer_regret(env_cfg, table, embed_cfg):
    """Mean normalized 20-tick regret of the greedy FQI policy over four random buffers,
    scored from every cell at three ticks inside each buffer's range."""
    means = []
    for buffer_seed in range(4):
        buf = random_buffer(env_cfg, 3000, buffer_seed)
        q = fqi_fit(buf, FQIConfig(iterations=30, n_trees=20), embed_cfg, seed=0)
        vals = []
        for start in range(7):
            for t0 in (1000, 1503, 2007):
                pos = [start]
                for k in range(20):
                    pos.append(pos[-1] + q.greedy(pos[-1], t0 + k))
                r = prospective_regret(pos, table, env_cfg, t0, 20)
                vals.append(normalized_regret(r, table, EnvState(start, t0), 20))
        means.append(np.mean(vals))
    return float(np.mean(means))


@pytest.mark.slow
def test_frozen_buffer_greedy_policy_near_oracle(env_cfg, table):
    assert _frozen_buffer_regret(env_cfg, table, EMB) <= 0.05


def test_frozen_buffer_greedy_policy_near_oracle_compact_time_code(env_cfg, table):
    # Four slots: one fast pair and the pair that repeats once per reward period.
    assert _frozen_buffer_regret(env_cfg, table, EmbeddingConfig(time_dim=4)) <= 0.05


def test_epsilon_schedule():
    assert epsilon_at(1.0, 0) == 1.0
    assert epsilon_at(1.0, 10**6) == 0.01
    assert epsilon_at(0.5, 693) == pytest.approx(0.5 * 0.999 ** 693)
    assert epsilon_at(0.5, 693) == pytest.approx(0.2499, abs=1e-4)
    e = [epsilon_at(1.0, t) for t in range(0, 20000, 37)]
    assert all(a >= b for a, b in zip(e, e[1:])) and min(e) == 0.01
    with pytest.raises(ValueError):
        epsilon_at(1.0, -1)


def test_online_fqi_random_before_warmup(env_cfg):
    cfg = FQIConfig(warmup=100, update_interval=50, n_trees=2, iterations=2)
    run = run_online_fqi(env_cfg, cfg, EMB, 160, np.random.default_rng(3), seed=3)
    assert all(run.explored[:98])
    assert run.refit_steps[0] == 149 and run.refit_steps == [149]
    pos = run.trajectory.positions()
    assert np.all(np.abs(np.diff(pos)) <= 1)


def test_online_fqi_refit_rule(env_cfg):
    cfg = FQIConfig(warmup=20, update_interval=10, n_trees=1, iterations=1)
    run = run_online_fqi(env_cfg, cfg, EMB, 60, np.random.default_rng(4), seed=4)
    assert run.refit_steps == [29, 39, 49, 59]


def test_online_fqi_deterministic(env_cfg):
    cfg = FQIConfig(warmup=30, update_interval=10, n_trees=2, iterations=2)
    a = run_online_fqi(env_cfg, cfg, EMB, 80, np.random.default_rng(5), seed=5)
    b = run_online_fqi(env_cfg, cfg, EMB, 80, np.random.default_rng(5), seed=5)
    assert a.trajectory.transitions == b.trajectory.transitions


def test_online_fqi_needs_more_steps_than_warmup(env_cfg):
    with pytest.raises(ValueError):
        run_online_fqi(env_cfg, FQIConfig(warmup=50), EMB, 50, np.random.default_rng(0))


def test_time_agnostic_q_ignores_tick(env_cfg):
    buf = random_buffer(env_cfg, 300, 6)
    q = fqi_fit(buf, FQIConfig(iterations=3, n_trees=5, time_aware=False), EMB)
    a = q.q_values(np.arange(7), np.full(7, 5))
    b = q.q_values(np.arange(7), np.full(7, 12345))
    assert np.array_equal(a, b)
    assert all(q.greedy(p, 5) == q.greedy(p, 77777) for p in range(7))


def test_q_masks_illegal_moves(env_cfg):
    q = constant_q(1.0).q_values([0, 3, 6], [0, 0, 0])
    assert np.isneginf(q[0, 0]) and np.isneginf(q[2, 2]) and np.all(np.isfinite(q[1]))


def test_random_ties_still_legal(env_cfg):
    q = constant_q(1.0)
    rng = np.random.default_rng(0)
    picks = {q.greedy(0, 0, rng) for _ in range(50)}
    assert picks == {0, 1}
    assert q.greedy(3, 0) == -1


def test_fqi_config_validation():
    for kwargs in (dict(iterations=0), dict(gamma=1.0), dict(epsilon0=1.5), dict(warmup=0)):
        with pytest.raises(ValueError):
            FQIConfig(**kwargs)


# ------------------------------------------------------------------ SAC


def test_masked_softmax():
    logits = np.array([[1.0, 2.0, 3.0], [5.0, 0.0, -1.0]])
    mask = np.array([[False, True, True], [True, True, False]])
    p, logp = masked_softmax(logits, mask)
    assert p[0, 0] == 0 and p[1, 2] == 0
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(p[0, 1:], np.exp([2, 3]) / np.exp([2, 3]).sum(), atol=1e-15)
    np.testing.assert_allclose(np.exp(logp[mask]), p[mask], atol=1e-15)


def _batch(cfg, n, rng):
    pos = rng.integers(0, cfg.width, n)
    ticks = rng.integers(0, 50, n)
    act = np.array([rng.choice([ACTIONS.index(a) for a in legal_actions(cfg, p)]) for p in pos])
    nxt = pos + np.asarray(ACTIONS)[act]
    rew = np.array([step(cfg, EnvState(int(p), int(t)), ACTIONS[a]).reward
                    for p, t, a in zip(pos, ticks, act)])
    return pos, ticks, act, rew, nxt


def test_polyak_rho_one_freezes_targets(env_cfg):
    agent = SACAgent(env_cfg, SACConfig(hidden=(8, 8), rho=1.0), EMB, np.random.default_rng(0))
    before = [t.flat().copy() for t in agent.targets]
    rng = np.random.default_rng(1)
    for _ in range(5):
        agent.update(*_batch(env_cfg, 16, rng))
    assert all(np.array_equal(b, t.flat()) for b, t in zip(before, agent.targets))
    assert not np.array_equal(before[0], agent.critics[0].flat())


@settings(max_examples=25, deadline=None)
@given(rho=st.floats(0.0, 1.0, exclude_min=True), seed=st.integers(0, 2**31))
def test_polyak_convex_combination(rho, seed):
    cfg = EnvConfig()
    agent = SACAgent(cfg, SACConfig(hidden=(8, 8), rho=rho), EMB, np.random.default_rng(seed))
    old = [t.flat().copy() for t in agent.targets]
    agent.update(*_batch(cfg, 16, np.random.default_rng(seed + 1)))
    for o, t, c in zip(old, agent.targets, agent.critics):
        np.testing.assert_allclose(t.flat(), rho * o + (1.0 - rho) * c.flat(), rtol=0, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), t1=st.integers(0, 10**7), t2=st.integers(0, 10**7))
def test_time_agnostic_policy_invariant(seed, t1, t2):
    agent = SACAgent(EnvConfig(), SACConfig(hidden=(8, 8), time_aware=False), EMB,
                     np.random.default_rng(seed))
    p1, _ = agent.policy(np.arange(7), np.full(7, t1))
    p2, _ = agent.policy(np.arange(7), np.full(7, t2))
    assert np.array_equal(p1, p2)
    assert all(agent.greedy(p, t1) == agent.greedy(p, t2) for p in range(7))


def test_policy_never_picks_illegal(env_cfg):
    agent = SACAgent(env_cfg, SACConfig(hidden=(8, 8)), EMB, np.random.default_rng(5))
    for t in range(30):
        assert agent.act(0, t) in (0, 1) and agent.act(6, t) in (-1, 0)


def test_low_temperature_matches_value_iteration_on_toy():
    # Two cells, reward period 8: the second time pair of a 4-slot code repeats once per
    # period, and tau=3 keeps every optimal decision at least 0.27 ahead of the other move.
    toy = EnvConfig(width=2, patch_a=0, patch_b=1, period=8, tau=3.0, gamma=0.5)
    emb = EmbeddingConfig(width=2, time_dim=4, period=8)
    table = solve(toy)

    def q_star(p, t, a):
        tr = step(toy, EnvState(p, t), a)
        return tr.reward + toy.gamma * table.state_value(tr.next_position, tr.next_tick)

    gaps = [abs(q_star(p, t, -1 if p else 1) - q_star(p, t, 0)) for p in range(2) for t in range(8)]
    assert min(gaps) > 0.25
    cfg = SACConfig(hidden=(16, 16), alpha=1e-6, rho=0.9, gamma=0.5, critic_lr=3e-3, actor_lr=3e-3)
    agent = SACAgent(toy, cfg, emb, np.random.default_rng(0))
    rows = [(p, t, ACTIONS.index(a)) for p in range(2) for t in range(32) for a in legal_actions(toy, p)]
    pos, ticks, act = (np.array(c) for c in zip(*rows))
    nxt = pos + np.asarray(ACTIONS)[act]
    rew = np.array([step(toy, EnvState(int(p), int(t)), ACTIONS[a]).reward for p, t, a in rows])
    for _ in range(1500):
        agent.update(pos, ticks, act, rew, nxt)
    q = np.minimum(*(c.forward(agent.features(pos, ticks)) for c in agent.critics))
    target = np.array([q_star(int(p), int(t), ACTIONS[a]) for p, t, a in rows])
    assert np.max(np.abs(q[np.arange(len(rows)), act] - target)) < 0.1
    for p in range(2):
        for t in range(31):
            assert agent.greedy(p, t) == table.action(p, t)


def test_online_sac_runs_and_is_deterministic(env_cfg):
    cfg = SACConfig(hidden=(8, 8), batch_size=8)
    a = run_online_sac(env_cfg, cfg, EMB, 40, np.random.default_rng(6))
    b = run_online_sac(env_cfg, cfg, EMB, 40, np.random.default_rng(6))
    assert a.trajectory.transitions == b.trajectory.transitions
    assert a.updates == 33


def test_online_sac_needs_more_than_a_batch(env_cfg):
    with pytest.raises(ValueError):
        run_online_sac(env_cfg, SACConfig(batch_size=64), EMB, 64, np.random.default_rng(0))


def test_sac_config_validation():
    for kwargs in (dict(alpha=0.0), dict(rho=0.0), dict(rho=1.5), dict(batch_size=0), dict(gamma=1.0)):
        with pytest.raises(ValueError):
            SACConfig(**kwargs)
