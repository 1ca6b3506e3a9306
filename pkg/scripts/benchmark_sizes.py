"""Time build-and-pass for the two smallest sizes of each family in both modes.

    python3 scripts/benchmark_sizes.py [--repeats 3] [--output results.csv]
"""
import argparse
import sys

from optmodel.bench import BenchConfig, emit_report, run_config

SIZES = {"fac": [25, 50], "lqcp": [500, 1000]}


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--output", help="also write the raw records as CSV")
    args = p.parse_args()
    reports = []
    for family, sizes in SIZES.items():
        config = BenchConfig(family, sizes, ["cached", "direct"], repeats=args.repeats)
        reports.extend(run_config(config))
        print(f"{family} done", file=sys.stderr)
    sys.stdout.write(emit_report(reports, "table").decode())
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(emit_report(reports, "csv"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
