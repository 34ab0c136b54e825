"""Run the direction-count comparison on both targets and write plot data."""

import argparse
from pathlib import Path

from ozd.bench import emit_plot_data, load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/direction_count")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--svg", action="store_true", help="also render SVG plots (needs matplotlib)")
    args = parser.parse_args()
    for cfg in load_config(ROOT / "configs" / "figure1.cfg"):
        summary = run_experiment(cfg, args.out, jobs=args.jobs)
        target = Path(args.out) / cfg.name
        emit_plot_data(summary, target / "plot_data_logy.csv", "log-y",
                       svg_path=target / "plot.svg" if args.svg else None)
        for label in summary.finals:
            print(f"{cfg.name:>10s} {label:<10s} mean final gap {summary.final_mean(label):.4g}")


if __name__ == "__main__":
    main()
