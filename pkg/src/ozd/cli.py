"""Command-line entry point.

    ozd run CONFIG [--out DIR] [--reps N] [--seed N] [--jobs N]
    ozd verify [--suite NAME ...] [--seed N] [--out DIR]
    ozd plot SUMMARY_DIR [--log-y] [--out FILE] [--svg FILE]
    ozd bench-directions [--dims ...] [--method ...] [--reps N]

Exit codes: 0 success, 1 config error, 2 verification failure, 3 objective failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import SUITES, emit_plot_data, load_config, load_summary, run_experiment, run_verification
from .errors import ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_OBJECTIVE = 0, 1, 2, 3

log = logging.getLogger("ozd")


def _cmd_run(args) -> int:
    overrides = {"repetitions": args.reps, "seed": args.seed}
    configs = load_config(args.config, overrides)
    status = EXIT_OK
    for cfg in configs:
        log.info("running %s: %s, d=%d, %d reps", cfg.name, cfg.objective, cfg.d, cfg.repetitions)
        summary = run_experiment(cfg, out_dir=args.out, jobs=args.jobs)
        for label in summary.finals:
            print(f"{cfg.name:>18s}  {label:<14s} median final gap {summary.final_median(label):.6g}")
        if summary.failed:
            for fail in summary.failed:
                print(f"failed: {fail['method']} repetition {fail['repetition']}: {fail['error']}", file=sys.stderr)
            status = EXIT_OBJECTIVE
    return status


def _cmd_verify(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, status, text = run_verification(args.suite or ["full"], seed=args.seed,
                                       report_path=out / "verification_report.txt")
    print(text, end="")
    return status


def _cmd_plot(args) -> int:
    summary = load_summary(args.summary)
    target = args.out or Path(args.summary) / ("plot_data_logy.csv" if args.log_y else "plot_data.csv")
    path = emit_plot_data(summary, target, "log-y" if args.log_y else "linear", svg_path=args.svg)
    print(path)
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .directions import benchmark_generation

    for method in args.method:
        for row in benchmark_generation(args.dims, method, args.reps, m=args.m):
            print(f"{method:<12s} d={row.d:<6d} mean={row.mean:.3e}s std={row.std:.3e}s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ozd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiments of a config file")
    p.add_argument("config")
    p.add_argument("--out", default="results")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="run Monte-Carlo oracle checks")
    p.add_argument("--suite", action="append", choices=sorted(SUITES) + ["full"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plot", help="write plot-ready data for an experiment directory")
    p.add_argument("summary")
    p.add_argument("--log-y", action="store_true")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("bench-directions", help="time direction-matrix generation")
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256, 512])
    p.add_argument("--method", nargs="+", default=["qr", "householder"])
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
