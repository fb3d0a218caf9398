#!/usr/bin/env python3
"""Run the benchmark grid and write runs/summary CSVs per configuration.

Desk-scale defaults (100 runs) match the acceptance suite; pass --runs 400
and larger budgets to reproduce publication-scale curves if you have the
patience for it on one core.
"""

import argparse
import os
import time

from cleo.bench import aggregate, run_experiment, write_runs_csv, write_summary_csv

GRID = [
    ("scheduling", 5, 3, 45),
    ("scheduling", 10, 6, 60),
    ("scheduling", 15, 9, 80),
    ("housing", 5, 3, 30),
    ("housing", 10, 6, 60),
    ("housing", 15, 9, 80),
    ("maxsat", 5, 3, 20),
    ("maxsat", 10, 6, 35),
    ("maxsat", 15, 9, 30),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20240809)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument(
        "--only",
        nargs="*",
        default=None,
        help="restrict to configurations named like scheduling_5_3",
    )
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    for bench, nf, ns, budget in GRID:
        name = f"{bench}_{nf}_{ns}"
        if args.only and name not in args.only:
            continue
        t0 = time.time()
        trajectories = run_experiment(
            bench, nf, ns, runs=args.runs, budget=budget, base_seed=args.seed
        )
        write_runs_csv(os.path.join(args.out_dir, f"{name}.csv"), trajectories)
        write_summary_csv(
            os.path.join(args.out_dir, f"{name}_summary.csv"), aggregate(trajectories)
        )
        converged = [t.converged_at for t in trajectories if t.converged_at is not None]
        print(
            f"{name}: {args.runs} runs x {budget} queries in {time.time() - t0:.0f}s, "
            f"{len(converged)} converged"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
