"""Command line entry point: ``proforg simulate | oracle | compare | plot``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from ..oracle import solve, table_rows
from . import config as config_mod
from .compare import compare, series_from_csv, write_comparison
from .experiment import fmt, run_experiment
from .plot import PlotStyle, plot

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _overrides(args) -> dict:
    out = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise config_mod.ConfigError(None, f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    for name in ("algorithm", "seeds", "output", "workers", "online_steps"):
        value = getattr(args, name, None)
        if value is not None:
            out[name] = str(value)
    return out


def _load(args):
    if args.config is None:
        return config_mod.build(_overrides(args))
    return config_mod.load(args.config, _overrides(args))


def cmd_simulate(args) -> int:
    cfg = _load(args)
    directory = Path(args.out) if args.out else None
    records, summary = run_experiment(cfg, directory)
    where = directory or Path(cfg.output) / cfg.algorithm
    stt = summary.steps_to_threshold
    print(f"{cfg.algorithm}: {len(records)} seeds, steps-to-threshold "
          f"{'never' if stt is None else stt}, auc {fmt(summary.auc)}, wrote {where}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _load(args)
    table = solve(cfg.env())
    fh = sys.stdout if args.out is None else open(args.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("position", "phase", "value", "action"))
        for p, phase, value, action in table_rows(table):
            w.writerow((p, phase, fmt(value), action))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.dirs) < 2:
        raise config_mod.ConfigError(None, "compare needs at least two experiment directories")
    comp = compare(args.dirs)
    out = Path(args.out)
    write_comparison(comp, out)
    for warning in comp.warnings:
        logging.warning(warning)
    for algo, stt, auc, term in comp.table():
        print(f"{algo}: steps-to-threshold {'never' if stt is None else stt}, "
              f"auc {fmt(auc)}, terminal {fmt(term)}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    series = series_from_csv(args.csv)
    style = PlotStyle(title=args.title) if args.title else PlotStyle()
    Path(args.output).write_text(plot(series, style), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="proforg", description="Prospective foraging experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one algorithm over a list of seeds")
    s.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    s.add_argument("--algorithm", help="override the config's algorithm")
    s.add_argument("--seeds", help="seed list such as 0..4 or 0,2,5")
    s.add_argument("--online-steps", dest="online_steps", type=int)
    s.add_argument("--workers", type=int, help="parallel seed workers")
    s.add_argument("--out", help="output directory (default <output>/<algorithm>)")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="dump the optimal value/policy table as CSV")
    o.add_argument("--config")
    o.add_argument("--set", action="append", metavar="KEY=VALUE")
    o.add_argument("-o", "--out", help="write CSV here instead of stdout")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("compare", help="align curves from two or more experiment directories")
    c.add_argument("dirs", nargs="+")
    c.add_argument("-o", "--out", default="comparison")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("plot", help="render a runs/summary/comparison CSV as SVG")
    g.add_argument("csv")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--title")
    g.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as an exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
