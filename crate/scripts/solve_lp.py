#!/usr/bin/env python3
"""Read an LP file with HiGHS, print its size and optionally solve it.

usage: solve_lp.py MODEL.lp [--solve SOLUTION.txt] [--time-limit SECONDS]

The first output line is `columns <c> rows <r>`. With --solve, the primal
values are written as `name value` lines, which `tsp-edo run
--ingest-solution` reads back.
"""
import argparse
import sys

try:
    import highspy
except ImportError:
    print("highspy is not installed", file=sys.stderr)
    sys.exit(3)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("--solve", metavar="OUT")
    ap.add_argument("--time-limit", type=float, default=60.0)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print("HiGHS could not read the model", file=sys.stderr)
        sys.exit(2)
    lp = h.getLp()
    print(f"columns {lp.num_col_} rows {lp.num_row_}")
    if not args.solve:
        return

    h.setOptionValue("time_limit", args.time_limit)
    h.run()
    status = h.getModelStatus()
    print(f"status {h.modelStatusToString(status)}")
    if status != highspy.HighsModelStatus.kOptimal:
        sys.exit(4)
    print(f"objective {h.getInfo().objective_function_value:.6f}")
    values = h.getSolution().col_value
    with open(args.solve, "w") as out:
        for name, v in zip(lp.col_names_, values):
            out.write(f"{name} {v:.6f}\n")


if __name__ == "__main__":
    main()
