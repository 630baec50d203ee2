"""Side-by-side regret curves from several experiment outputs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .experiment import Summary, area_under, fmt, read_records, steps_to_threshold, summarize
from .plot import PlotStyle, Series, plot

SUMMARY_COLUMNS = ("algorithm", "step", "mean_normalized_regret", "stderr", "n_seeds")


@dataclass
class Comparison:
    summaries: list
    warnings: list = field(default_factory=list)

    def table(self) -> list:
        """``(algorithm, steps_to_threshold, auc, terminal_mean)`` per input."""
        return [(s.algorithm, s.steps_to_threshold, s.auc, float(s.mean[-1])) for s in self.summaries]

    def by_name(self, algorithm: str) -> Summary:
        for s in self.summaries:
            if s.algorithm == algorithm:
                return s
        raise KeyError(algorithm)

    def curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in self.summaries:
            for step, m, e in zip(s.steps, s.mean, s.stderr):
                w.writerow((s.algorithm, fmt(step), fmt(m), fmt(e), s.n_seeds))
        return buf.getvalue()

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("algorithm", "steps_to_threshold", "auc", "terminal_mean"))
        for algo, stt, auc, term in self.table():
            w.writerow((algo, "" if stt is None else stt, fmt(auc), fmt(term)))
        return buf.getvalue()

    def svg(self, style: PlotStyle = PlotStyle()) -> str:
        return plot([Series(s.algorithm, s.steps, s.mean, s.stderr) for s in self.summaries], style)


def _spacing(steps) -> float:
    steps = np.asarray(steps)
    return float(np.median(np.diff(steps))) if len(steps) > 1 else np.inf


def _resample(s: Summary, grid: np.ndarray) -> Summary:
    mean = np.interp(grid, s.steps, s.mean)
    stderr = np.interp(grid, s.steps, s.stderr)
    return Summary(s.algorithm, grid, mean, stderr, s.n_seeds, steps_to_threshold(grid, mean),
                   area_under(grid, mean))


def align(summaries: list) -> Comparison:
    """Put every summary on one grid.  Identical grids pass through untouched; otherwise
    curves are linearly resampled onto the coarsest grid, clipped to the common step range,
    and a warning is recorded."""
    if len(summaries) < 2:
        raise ValueError("compare needs at least two experiment outputs")
    grids = [np.asarray(s.steps) for s in summaries]
    if all(np.array_equal(g, grids[0]) for g in grids[1:]):
        return Comparison(list(summaries))
    coarse = max(range(len(grids)), key=lambda i: (_spacing(grids[i]), -i))
    lo = max(g[0] for g in grids)
    hi = min(g[-1] for g in grids)
    grid = grids[coarse][(grids[coarse] >= lo) & (grids[coarse] <= hi)]
    if len(grid) == 0:
        raise ValueError("experiment outputs share no overlapping steps")
    out, warnings = [], []
    for s, g in zip(summaries, grids):
        if np.array_equal(g, grid):
            out.append(s)
        else:
            warnings.append(f"{s.algorithm}: resampled from {len(g)} to {len(grid)} evaluation "
                            f"steps (grid of {summaries[coarse].algorithm})")
            out.append(_resample(s, grid))
    return Comparison(out, warnings)


def load_summary(path) -> Summary:
    """Summary from an experiment directory or a ``runs.csv`` file."""
    path = Path(path)
    if path.is_dir():
        path = path / "runs.csv"
    records = read_records(path)
    algos = {r.algorithm for r in records}
    if len(algos) != 1:
        raise ValueError(f"{path}: expected one algorithm, found {sorted(algos)}")
    return summarize(records)


def compare(paths: list) -> Comparison:
    return align([load_summary(p) for p in paths])


def write_comparison(comp: Comparison, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "comparison.csv").write_text(comp.curves_csv(), encoding="utf-8")
    (directory / "comparison_table.csv").write_text(comp.table_csv(), encoding="utf-8")
    (directory / "comparison.svg").write_text(comp.svg(), encoding="utf-8")
    if comp.warnings:
        (directory / "warnings.txt").write_text("\n".join(comp.warnings) + "\n", encoding="utf-8")
    return directory


def series_from_csv(path) -> list:
    """Plot series from any CSV the harness writes (per-seed runs or aggregated curves)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    cols = set(rows[0])
    if "mean_normalized_regret" in cols:
        groups: dict = {}
        for r in rows:
            groups.setdefault(r["algorithm"], []).append(r)
        return [Series(a, np.array([float(r["step"]) for r in rs]),
                       np.array([float(r["mean_normalized_regret"]) for r in rs]),
                       np.array([float(r["stderr"]) for r in rs])) for a, rs in groups.items()]
    if "normalized_regret" in cols:
        records = read_records(path)
        by_algo: dict = {}
        for r in records:
            by_algo.setdefault(r.algorithm, []).append(r)
        out = []
        for algo, recs in by_algo.items():
            s = summarize(recs)
            out.append(Series(algo, s.steps, s.mean, s.stderr))
        return out
    raise ValueError(f"{path}: unrecognised CSV columns {sorted(cols)}")
