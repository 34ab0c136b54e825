"""Run O-ZD against the baselines on the extended convex test functions."""

import argparse
from pathlib import Path

from ozd.bench import load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/extended")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--reps", type=int)
    args = parser.parse_args()
    for path in sorted((ROOT / "configs").glob("table3_*.cfg")):
        for cfg in load_config(path, {"repetitions": args.reps}):
            summary = run_experiment(cfg, args.out, jobs=args.jobs)
            cells = "  ".join(f"{k}={summary.final_median(k):.3g}" for k in summary.finals)
            print(f"{cfg.name:<20s} {cells}")


if __name__ == "__main__":
    main()
