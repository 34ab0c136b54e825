"""Time direction-matrix generation for each generator across dimensions."""

import argparse

from ozd.directions import benchmark_generation


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256, 512])
    parser.add_argument("--reps", type=int, default=100)
    args = parser.parse_args()
    print(f"{'d':>5s} {'qr':>12s} {'householder':>12s} {'butterfly':>12s}")
    cols = {m: benchmark_generation(args.dims, m, args.reps) for m in ("qr", "householder", "butterfly")}
    for i, d in enumerate(args.dims):
        print(f"{d:>5d} " + " ".join(f"{cols[m][i].mean:12.3e}" for m in cols))


if __name__ == "__main__":
    main()
