"""Experiment configuration, seeded runs, comparisons, plots and the command line."""

from .compare import Comparison, align, compare, load_summary, write_comparison
from .config import ALGORITHMS, ConfigError, ExperimentConfig, build, default, load, load_text, parse_seeds
from .experiment import (
    COLUMNS,
    THRESHOLD,
    RunRecord,
    Summary,
    area_under,
    read_records,
    records_csv,
    run_experiment,
    run_seed,
    run_seeds,
    score,
    simulate,
    steps_to_threshold,
    summarize,
    write_outputs,
)
from .plot import PlotStyle, Series, plot

__all__ = [
    "Comparison", "align", "compare", "load_summary", "write_comparison", "ALGORITHMS",
    "ConfigError", "ExperimentConfig", "build", "default", "load", "load_text", "parse_seeds",
    "COLUMNS", "THRESHOLD", "RunRecord", "Summary", "area_under", "read_records", "records_csv",
    "run_experiment", "run_seed", "run_seeds", "score", "simulate", "steps_to_threshold",
    "summarize", "write_outputs", "PlotStyle", "Series", "plot",
]
