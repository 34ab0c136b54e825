"""Compare O-ZD with Gaussian and spherical finite differences at d = 10."""

import argparse
from pathlib import Path

from ozd.bench import emit_plot_data, load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/baseline_comparison")
    parser.add_argument("--svg", action="store_true")
    args = parser.parse_args()
    for name in ("figure2_smooth.cfg", "figure2_nonsmooth.cfg"):
        for cfg in load_config(ROOT / "configs" / name):
            summary = run_experiment(cfg, args.out)
            target = Path(args.out) / cfg.name
            emit_plot_data(summary, target / "plot_data_logy.csv", "log-y",
                           svg_path=target / "plot.svg" if args.svg else None)
            for label in summary.finals:
                print(f"{cfg.name:>10s} {label:<14s} median final gap {summary.final_median(label):.4g}")


if __name__ == "__main__":
    main()
