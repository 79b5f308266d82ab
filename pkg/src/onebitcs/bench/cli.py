"""Command line front end: ``run``, ``summarize``, ``plotdata``, ``props``.

Exit codes: 0 success, 2 config error, 3 I/O or input-format error.
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config, load_props_config
from .runner import (
    CSVFormatError,
    emit_plotdata,
    props_to_csv,
    records_to_csv,
    run_experiment,
    run_props,
    summarize,
    summarize_records,
    summary_to_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_run(args):
    cfg = load_config(args.config)
    if args.no_timing:
        cfg.timing = False
    records = run_experiment(cfg, threads=args.threads)
    out = args.out or cfg.output
    _write(out, records_to_csv(records))
    if out not in (None, "-"):
        sys.stdout.write(summary_to_csv(summarize_records(records)))
    return EXIT_OK


def cmd_summarize(args):
    sys.stdout.write(summary_to_csv(summarize(args.inp)))
    return EXIT_OK


def cmd_plotdata(args):
    series = emit_plotdata(args.inp, args.out)
    for algorithm, points in sorted(series.items()):
        print(f"{algorithm}: {len(points)} points")
    return EXIT_OK


def cmd_props(args):
    cfg = load_props_config(args.config)
    estimates = run_props(cfg)
    _write(args.out or cfg.output, props_to_csv(estimates, cfg.seed))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="onebitcs", description="One-bit compressive sensing experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo sweep and write trial records")
    run.add_argument("--config", required=True)
    run.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--out", help="trial CSV path ('-' for stdout); overrides output.path")
    run.add_argument("--no-timing", action="store_true", help="write wall_ms = 0 for byte-identical reruns")
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="median / p90 errors per cell and algorithm")
    summ.add_argument("--in", dest="inp", required=True)
    summ.set_defaults(func=cmd_summarize)

    plot = sub.add_parser("plotdata", help="per-algorithm (m, median_error) CSV series")
    plot.add_argument("--in", dest="inp", required=True)
    plot.add_argument("--out", required=True, help="output directory")
    plot.set_defaults(func=cmd_plotdata)

    props = sub.add_parser("props", help="estimate SPEP / RIP1 / TES / width for a config")
    props.add_argument("--config", required=True)
    props.add_argument("--out", help="CSV path (default stdout)")
    props.set_defaults(func=cmd_props)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CSVFormatError as exc:
        for problem in exc.problems:
            print(f"malformed input: {problem}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
