"""Seeded experiment runs: simulate, score against the oracle, write CSVs.

One row is logged every ``eval_every`` steps.  ``step`` is the tick minus the
algorithm's pre-learning offset (the planner's warm-up, FQI's buffer warm-up,
zero for SAC), so curves of different algorithms share an axis and warm-up
rows carry ``step <= 0``.  Regret at a row is scored on the realised
trajectory over the next ``eval_window`` ticks, except for offline ProForg
after warm-up, which is scored on a greedy rollout of the frozen planner.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import planner as planner_mod
from ..baselines import run_online_fqi, run_online_sac
from ..env import EnvState
from ..oracle import OracleTable, normalized_regret, prospective_regret, solve
from .config import ExperimentConfig

log = logging.getLogger(__name__)

THRESHOLD = 0.05
COLUMNS = ("seed", "algorithm", "tick", "step", "position", "action", "reward",
           "regret", "normalized_regret", "score")

PLANNER_VARIANTS = {
    "proforg": ("full", "online"),
    "proforg_i": ("instantaneous_only", "online"),
    "proforg_c": ("terminal_only", "online"),
    "proforg_offline": ("full", "offline"),
}


def fmt(x) -> str:
    """Locale-free CSV cell: integers verbatim, reals at 12 significant digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x != x:
        return "nan"
    if x == 0.0:
        return "0"  # folds -0.0
    return format(x, ".12g")


@dataclass
class RunRecord:
    seed: int
    algorithm: str
    ticks: np.ndarray
    steps: np.ndarray
    positions: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    regret: np.ndarray
    normalized: np.ndarray
    scores: np.ndarray  # chosen-path score of the planner's decision; NaN elsewhere

    def __len__(self) -> int:
        return len(self.ticks)

    def rows(self):
        for i in range(len(self)):
            yield (self.seed, self.algorithm, self.ticks[i], self.steps[i], self.positions[i],
                   self.actions[i], self.rewards[i], self.regret[i], self.normalized[i],
                   self.scores[i])


def offset_of(cfg: ExperimentConfig, algorithm: str) -> int:
    if algorithm in PLANNER_VARIANTS:
        return cfg["planner.warmup_steps"]
    if algorithm in ("fqi", "fqi_notime"):
        return cfg["fqi.warmup"]
    return 0


def eval_ticks(offset: int, online_steps: int, eval_every: int) -> np.ndarray:
    """Ticks ``t`` in ``[0, offset + online_steps]`` with ``(t - offset) % eval_every == 0``."""
    first = offset % eval_every
    return np.arange(first, offset + online_steps + 1, eval_every, dtype=np.int64)


def simulate(cfg: ExperimentConfig, seed: int, algorithm: str | None = None):
    """Run one seed; returns ``(trajectory, greedy_rollouts, scores)``.

    The rollouts map a tick to frozen-planner positions (offline ProForg only,
    otherwise empty); ``scores[t]`` is the chosen-path score of the decision taken
    at tick ``t`` (NaN where no planner decision was made).
    """
    algorithm = algorithm or cfg.algorithm
    env, embed = cfg.env(), cfg.embedding()
    rng = np.random.default_rng(seed)
    extra = cfg.online_steps + cfg.eval_window
    if algorithm in PLANNER_VARIANTS:
        variant, mode = PLANNER_VARIANTS[algorithm]
        pcfg = cfg.planner(variant, mode)
        res = planner_mod.run(env, pcfg, embed, cfg.regressor(seed), extra, rng,
                              eval_every=cfg.eval_every, eval_window=cfg.eval_window)
        rollouts = {pcfg.warmup_steps + k: v for k, v in res.greedy_rollouts.items()}
        scores = np.full(len(res.trajectory), np.nan)
        scores[pcfg.warmup_steps:] = res.scores
        return res.trajectory, rollouts, scores
    if algorithm in ("fqi", "fqi_notime"):
        fcfg = cfg.fqi(time_aware=algorithm == "fqi")
        res = run_online_fqi(env, fcfg, embed, fcfg.warmup + extra, rng, seed)
        return res.trajectory, {}, np.full(len(res.trajectory), np.nan)
    if algorithm in ("sac", "sac_notime"):
        res = run_online_sac(env, cfg.sac(time_aware=algorithm == "sac"), embed, extra, rng)
        return res.trajectory, {}, np.full(len(res.trajectory), np.nan)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def score(cfg: ExperimentConfig, seed: int, algorithm: str, trajectory, rollouts: dict,
          scores=None, table: OracleTable | None = None) -> RunRecord:
    """Oracle regret at every evaluation tick of a simulated trajectory."""
    env = cfg.env()
    table = table if table is not None else solve(env)
    T = cfg.eval_window
    offset = offset_of(cfg, algorithm)
    ticks = eval_ticks(offset, cfg.online_steps, cfg.eval_every)
    positions = trajectory.positions()
    actions, rewards = trajectory.actions(), trajectory.rewards()
    reg = np.empty(len(ticks))
    nreg = np.empty(len(ticks))
    for i, t in enumerate(ticks):
        window = rollouts.get(int(t))
        if window is None:
            window = positions[t:t + T + 1]
        reg[i] = prospective_regret(window, table, env, int(t), T)
        nreg[i] = normalized_regret(reg[i], table, EnvState(int(positions[t]), int(t)), T)
    scores = np.full(len(actions), np.nan) if scores is None else np.asarray(scores)
    return RunRecord(seed, algorithm, ticks, ticks - offset, positions[ticks],
                     np.asarray(actions)[ticks], np.asarray(rewards)[ticks], reg, nreg,
                     scores[ticks])


def run_seed(cfg: ExperimentConfig, seed: int) -> RunRecord:
    log.info("%s seed %d: simulating", cfg.algorithm, seed)
    trajectory, rollouts, scores = simulate(cfg, seed)
    return score(cfg, seed, cfg.algorithm, trajectory, rollouts, scores)


def _run_seed_star(args):
    return run_seed(*args)


def run_seeds(cfg: ExperimentConfig) -> list:
    """Records ordered by the config's seed list; ``workers > 1`` uses a process pool."""
    jobs = [(cfg, s) for s in cfg.seeds]
    if cfg.workers == 1 or len(jobs) == 1:
        return [run_seed(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
        return list(pool.map(_run_seed_star, jobs))


# ---------------------------------------------------------------- summaries


@dataclass
class Summary:
    algorithm: str
    steps: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_seeds: int
    steps_to_threshold: int | None
    auc: float

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "n_seeds": self.n_seeds,
                "steps_to_threshold": self.steps_to_threshold, "auc": self.auc,
                "threshold": THRESHOLD}


def steps_to_threshold(steps, mean, threshold: float = THRESHOLD):
    """First non-negative step whose mean normalized regret is at or below ``threshold``."""
    steps, mean = np.asarray(steps), np.asarray(mean)
    hit = np.flatnonzero((steps >= 0) & (mean <= threshold))
    return int(steps[hit[0]]) if len(hit) else None


def area_under(steps, values, max_step: int | None = None) -> float:
    """Trapezoidal area over the non-negative steps (optionally capped at ``max_step``)."""
    steps, values = np.asarray(steps, dtype=np.float64), np.asarray(values, dtype=np.float64)
    keep = steps >= 0
    if max_step is not None:
        keep &= steps <= max_step
    if keep.sum() < 2:
        return 0.0
    return float(np.trapezoid(values[keep], steps[keep]))


def curve_stats(matrix: np.ndarray):
    matrix = np.asarray(matrix, dtype=np.float64)
    mean = matrix.mean(axis=0)
    if len(matrix) > 1:
        stderr = matrix.std(axis=0, ddof=1) / np.sqrt(len(matrix))
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def summarize(records: list) -> Summary:
    if not records:
        raise ValueError("no records to summarize")
    steps = records[0].steps
    for r in records[1:]:
        if not np.array_equal(r.steps, steps):
            raise ValueError("records disagree on the evaluation grid")
    mean, stderr = curve_stats(np.stack([r.normalized for r in records]))
    return Summary(records[0].algorithm, steps, mean, stderr, len(records),
                   steps_to_threshold(steps, mean), area_under(steps, mean))


# ---------------------------------------------------------------- output


def records_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in records:
        for row in rec.rows():
            w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def summary_csv(summary: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("algorithm", "step", "mean_normalized_regret", "stderr", "n_seeds"))
    for s, m, e in zip(summary.steps, summary.mean, summary.stderr):
        w.writerow((summary.algorithm, fmt(s), fmt(m), fmt(e), summary.n_seeds))
    return buf.getvalue()


def read_records(path) -> list:
    """Parse a runs CSV back into records, one per seed in file order."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    missing = set(COLUMNS) - set(rows[0])
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    groups: dict = {}
    for row in rows:
        groups.setdefault((int(row["seed"]), row["algorithm"]), []).append(row)
    out = []
    for (seed, algo), rs in groups.items():
        col = lambda k, t: np.asarray([t(r[k]) for r in rs])  # noqa: E731
        out.append(RunRecord(seed, algo, col("tick", int), col("step", int), col("position", int),
                             col("action", int), col("reward", float), col("regret", float),
                             col("normalized_regret", float), col("score", float)))
    return out


def write_outputs(cfg: ExperimentConfig, records: list, directory=None) -> Path:
    """``runs.csv``, ``summary.csv``, ``summary.json`` and ``config.txt`` under
    ``<output>/<algorithm>``."""
    directory = Path(directory) if directory is not None else Path(cfg.output) / cfg.algorithm
    directory.mkdir(parents=True, exist_ok=True)
    summary = summarize(records)
    (directory / "runs.csv").write_text(records_csv(records), encoding="utf-8")
    (directory / "summary.csv").write_text(summary_csv(summary), encoding="utf-8")
    (directory / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (directory / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    return directory


def run_experiment(cfg: ExperimentConfig, directory=None, write: bool = True):
    """All seeds of ``cfg``; returns ``(records, summary)`` and writes files unless ``write`` is off."""
    records = run_seeds(cfg)
    if write:
        write_outputs(cfg, records, directory)
    return records, summarize(records)
