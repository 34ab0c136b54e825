"""Run the full Monte-Carlo verification suite and exit non-zero on failure."""

import argparse
import sys

from ozd.bench import run_verification


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--report", default="verification_report.txt")
    args = parser.parse_args()
    _, status, text = run_verification(["full"], args.seed, args.report)
    print(text, end="")
    return status


if __name__ == "__main__":
    sys.exit(main())
