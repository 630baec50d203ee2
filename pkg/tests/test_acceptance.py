"""Acceptance suite: one test per criterion, each timed against its budget.

Every criterion appends a one-line verdict to ``RESULTS``; ``conftest.py``
prints the block at the end of the session, so the verdicts appear together
even when pytest captures output.  A criterion fails if its quantitative
condition fails or if it overruns its runtime budget.  Expensive runs shared
between criteria (online ProForg with forests) are cached and their time is
charged to the first criterion that needs them.
"""

import functools
import time

import numpy as np
import pytest

from proforg.env import EnvConfig, reward_field
from proforg.harness import area_under, build, run_experiment
from proforg.harness.cli import main
from proforg.oracle import solve
from proforg.planner import all_paths, score_path, score_paths

from reference import brute_force_values, legal_path_count, schedule
from test_env import closed_form
from test_learners import finite_difference, one_hot_table, relative_error

pytestmark = pytest.mark.acceptance

RESULTS = []
SEEDS = "0..4"
THRESHOLD = 0.05


def record(number, title, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    verdict = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number:2d} {verdict}  {title}: {detail} [{elapsed:.1f}s of {budget:.0f}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, f"over budget: {line}"


def experiment(algorithm, online_steps, eval_every=1, **keys):
    values = {"algorithm": algorithm, "seeds": SEEDS, "online_steps": str(online_steps),
              "eval_every": str(eval_every)}
    values.update({k: str(v) for k, v in keys.items()})
    _, summary = run_experiment(build(values), write=False)
    return summary


def stt_text(stt):
    return "never" if stt is None else str(stt)


@functools.cache
def online_proforg(online_steps):
    return experiment("proforg", online_steps)


# ---------------------------------------------------------------- 1


def test_criterion_01_oracle_exact():
    t0 = time.perf_counter()
    cfg = EnvConfig()
    table = solve(cfg)
    brute = brute_force_values(schedule(7, 2, 5, 10, 2.0), table.value, 0.9, 12)
    err = float(np.max(np.abs(brute - table.value)))
    ok = table.residual < 1e-10 and err <= 1e-8 and brute.shape == (7, 10)
    record(1, "oracle exact", ok,
           f"residual {table.residual:.2e} (< 1e-10), 70-state 12-step brute-force max error {err:.2e} "
           "(<= 1e-8)", time.perf_counter() - t0, 30)


# ---------------------------------------------------------------- 2


def test_criterion_02_environment_closed_form():
    t0 = time.perf_counter()
    cfg = EnvConfig()
    ticks = np.random.default_rng(2024).integers(0, 10**7, 1000)
    err = max(float(np.max(np.abs(reward_field(cfg, int(t)) - np.asarray(closed_form(cfg, int(t))))))
              for t in ticks)
    periodic = all(np.array_equal(reward_field(cfg, int(t)), reward_field(cfg, int(t) + cfg.period))
                   for t in ticks)
    record(2, "environment closed form", err <= 1e-12 and periodic,
           f"max error {err:.1e} over 1000 ticks (<= 1e-12), exact period-{cfg.period} repeat {periodic}",
           time.perf_counter() - t0, 1)


# ---------------------------------------------------------------- 3


def test_criterion_03_proforg_convergence():
    t0 = time.perf_counter()
    s = online_proforg(50)
    ok = s.steps_to_threshold is not None and s.steps_to_threshold <= 50
    record(3, "online ProForg convergence", ok,
           f"mean regret over 5 seeds first <= {THRESHOLD} at step {stt_text(s.steps_to_threshold)} "
           f"(needs <= 50)", time.perf_counter() - t0, 300)


# ---------------------------------------------------------------- 4


FQI_KEYS = {"fqi.n_trees": 20, "fqi.min_leaf": 10, "fqi.update_interval": 250}


def test_criterion_04_baseline_ordering():
    t0 = time.perf_counter()
    proforg = online_proforg(50)
    fqi = experiment("fqi", 5000, 50, **FQI_KEYS)
    fqi_notime = experiment("fqi_notime", 5000, 50, **FQI_KEYS)
    sac_notime = experiment("sac_notime", 5000, 50)
    p_stt, f_stt = proforg.steps_to_threshold, fqi.steps_to_threshold
    fqi_ok = f_stt is not None and p_stt is not None and f_stt >= 10 * p_stt
    floor_fqi = float(fqi_notime.mean[fqi_notime.steps >= 0].min())
    floor_sac = float(sac_notime.mean[sac_notime.steps >= 0].min())
    ok = fqi_ok and floor_fqi >= 0.2 and floor_sac >= 0.2
    record(4, "baseline ordering", ok,
           f"time-aware FQI steps-to-{THRESHOLD} {stt_text(f_stt)} vs ProForg {stt_text(p_stt)} "
           f"(needs reached and >= 10x; final mean {fqi.mean[-1]:.3f}); minimum mean regret "
           f"fqi_notime {floor_fqi:.3f}, sac_notime {floor_sac:.3f} (need >= 0.2)",
           time.perf_counter() - t0, 1800)


# ---------------------------------------------------------------- 5


def test_criterion_05_online_vs_offline():
    t0 = time.perf_counter()
    online = online_proforg(50)
    on = online.steps_to_threshold
    budget_steps = 2 * on if on is not None else 0
    offline = experiment("proforg_offline", max(budget_steps, 1))
    off = offline.steps_to_threshold
    ok = on is not None and (off is None or off >= 2 * on)
    record(5, "online vs offline", ok,
           f"steps-to-{THRESHOLD} offline {stt_text(off)} vs online {stt_text(on)} "
           f"(needs offline >= 2x online; offline run to step {budget_steps})",
           time.perf_counter() - t0, 600)


# ---------------------------------------------------------------- 6


def test_criterion_06_ablation_ordering():
    t0 = time.perf_counter()
    auc = {}
    for algo in ("proforg", "proforg_i", "proforg_c"):
        s = online_proforg(300) if algo == "proforg" else experiment(algo, 300)
        auc[algo] = area_under(s.steps, s.mean, max_step=300)
    ok = auc["proforg"] < auc["proforg_i"] and auc["proforg"] < auc["proforg_c"]
    record(6, "ablation ordering", ok,
           "AUC over steps 0..300: " + ", ".join(f"{k} {v:.3f}" for k, v in auc.items())
           + " (full must be strictly smallest)", time.perf_counter() - t0, 900)


# ---------------------------------------------------------------- 7


MLP_KEYS = {"learner.kind": "mlp", "learner.epochs": 50}


def test_criterion_07_regressor_ordering():
    t0 = time.perf_counter()
    trees = online_proforg(300)
    mlp = experiment("proforg", 300, **MLP_KEYS)
    t_stt, m_stt = trees.steps_to_threshold, mlp.steps_to_threshold
    ok = t_stt is not None and m_stt is not None and t_stt < m_stt
    record(7, "regressor ordering", ok,
           f"steps-to-{THRESHOLD} trees {stt_text(t_stt)} vs MLP {stt_text(m_stt)} over 300 steps "
           f"(both must converge, trees first; MLP final mean {mlp.mean[-1]:.3f})",
           time.perf_counter() - t0, 1200)


# ---------------------------------------------------------------- 8


def test_criterion_08_learner_micro_suite():
    from proforg.learners import Network, RegressorSpec, fit, fit_boosted, mlp_gradient

    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        sizes = [int(rng.integers(2, 6)), int(rng.integers(2, 7)), int(rng.integers(2, 7)), 1]
        net = Network.init(sizes, rng)
        for b in net.biases:
            b[:] = rng.normal(scale=0.3, size=b.shape)
        X = rng.normal(size=(int(rng.integers(3, 9)), sizes[0]))
        y = rng.normal(size=len(X))
        worst = max(worst, relative_error(mlp_gradient(net, X, y), finite_difference(sizes, net.flat(), X, y)))
    data = one_hot_table()
    memorized = np.array_equal(fit(RegressorSpec(n_trees=10, bootstrap=False), data).predict(data.X), data.y)
    rng = np.random.default_rng(8)
    X = rng.normal(size=(80, 4))
    _, losses = fit_boosted(X, np.sin(X[:, 0]) + 0.1 * rng.normal(size=80), n_rounds=60,
                            learning_rate=0.3, max_depth=2, return_losses=True)
    monotone = bool(np.all(np.diff(losses) <= 0.0))
    record(8, "learner micro-suite", worst < 1e-4 and memorized and monotone,
           f"worst gradient relative error {worst:.1e} over 20 nets (< 1e-4), memorizing forest exact "
           f"{memorized}, boosted loss non-increasing {monotone}", time.perf_counter() - t0, 10)


# ---------------------------------------------------------------- 9


def test_criterion_09_planner_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    cfg = EnvConfig()
    worst = 0.0
    for _ in range(1000):
        a, b = rng.normal(size=(7, 10)), rng.normal(size=(7, 10))
        inst = lambda p, t, a=a: a[np.asarray(p), np.asarray(t) % 10]  # noqa: E731
        term = lambda p, t, b=b: b[np.asarray(p), np.asarray(t) % 10]  # noqa: E731
        H = int(rng.integers(1, 7))
        paths = all_paths(cfg, int(rng.integers(7)), H)
        path = paths[int(rng.integers(len(paths)))]
        tick = int(rng.integers(10**6))
        full = score_path(path, inst, term, 0.9, tick, "full")
        parts = (score_path(path, inst, term, 0.9, tick, "instantaneous_only")
                 + score_path(path, inst, term, 0.9, tick, "terminal_only"))
        worst = max(worst, abs(full - parts))
        worst = max(worst, abs(score_paths(path[None, :], inst, term, 0.9, tick, "full")[0] - full))
    wide = EnvConfig(width=15, patch_a=2, patch_b=5)
    counts_ok = all(len(all_paths(wide, 7, H)) == 3 ** H
                    and len(all_paths(wide, 7, H, actions=(-1, 1))) == 2 ** H for H in range(1, 7))
    counts_ok &= all(len(all_paths(cfg, p, H)) == legal_path_count(7, p, H)
                     for p in range(7) for H in range(1, 8))
    record(9, "planner algebra", worst <= 1e-12 and counts_ok,
           f"decomposition worst gap {worst:.1e} on 1000 model/path pairs (<= 1e-12), path counts exact "
           f"{counts_ok}", time.perf_counter() - t0, 5)


# ---------------------------------------------------------------- 10


DETERMINISM_CONFIG = """\
seeds = 0..2
online_steps = 12
eval_every = 3
planner.warmup_steps = 80
learner.n_trees = 20
fqi.warmup = 60
fqi.update_interval = 20
fqi.n_trees = 10
sac.batch_size = 16
sac.hidden = 32,32
"""


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    config = tmp_path / "determinism.cfg"
    config.write_text(DETERMINISM_CONFIG)
    mismatches, codes = [], []
    for algo in ("proforg", "proforg_offline", "fqi", "sac_notime"):
        outs = {}
        for tag, workers in (("first", 1), ("second", 1), ("parallel", 3)):
            out = tmp_path / f"{algo}-{tag}"
            codes.append(main(["simulate", "--config", str(config), "--algorithm", algo,
                               "--workers", str(workers), "--out", str(out)]))
            outs[tag] = {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}
        for tag in ("second", "parallel"):
            if outs[tag] != outs["first"]:
                mismatches.append(f"{algo}/{tag}")
    ok = not mismatches and all(c == 0 for c in codes)
    record(10, "determinism", ok,
           f"4 algorithms x (repeat, 3-worker parallel): byte-identical CSVs "
           f"{'yes' if not mismatches else 'no: ' + ', '.join(mismatches)}",
           time.perf_counter() - t0, 120)

