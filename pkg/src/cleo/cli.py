"""Command-line entry points.

    cleo run         simulate elicitation sessions and write loss trajectories
    cleo aggregate   reduce a runs CSV to per-query median/quartiles
    cleo solve       optimize a weighted problem file (or minimize it)
    cleo encode-scsp translate a soft-constraint problem to weighted SAT
    cleo serve       start the HTTP session service
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench
from .core import configuration_to_json, load_problem, rational_str
from .maxsmt import maximize, minimize
from .scsp import encode, export_wdimacs, scsp_from_json, weighted_sat_to_json
from .smt import SmtSession


def _cmd_run(args) -> int:
    trajectories = bench.run_experiment(
        args.benchmark,
        args.features,
        args.soft,
        runs=args.runs,
        budget=args.budget,
        base_seed=args.seed,
        variance=args.variance,
        degree=args.degree,
    )
    bench.write_runs_csv(args.out, trajectories)
    converged = [t.converged_at for t in trajectories if t.converged_at is not None]
    print(f"wrote {args.out}: {len(trajectories)} runs, budget {args.budget}")
    print(f"converged runs: {len(converged)}/{len(trajectories)}")
    return 0


def _cmd_aggregate(args) -> int:
    trajectories = bench.read_runs_csv(args.runs_csv)
    bench.write_summary_csv(args.out, bench.aggregate(trajectories))
    print(f"wrote {args.out}")
    return 0


def _cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    if args.verbose:
        session = SmtSession(list(problem.hard), problem.attributes, args.seed)
        sys.stderr.write(session.abstraction.to_dimacs())
    res = minimize(problem, seed=args.seed) if args.minimize else maximize(problem, seed=args.seed)
    if res is None:
        print(json.dumps({"status": "infeasible"}))
        return 1
    print(
        json.dumps(
            {
                "status": "optimal",
                "value": rational_str(res.value),
                "model": configuration_to_json(res.model),
            },
            indent=2,
        )
    )
    return 0


def _cmd_encode_scsp(args) -> int:
    with open(args.scsp, "r", encoding="utf-8") as fh:
        s = scsp_from_json(json.load(fh))
    enc = encode(s, merge_equal_weights=args.merge)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(weighted_sat_to_json(enc), fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    if args.dimacs:
        with open(args.dimacs, "w", encoding="utf-8") as fh:
            fh.write(export_wdimacs(enc))
        print(f"wrote {args.dimacs}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    app = create_app(log_dir=args.log_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cleo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run simulated elicitation experiments")
    run.add_argument("--benchmark", required=True, choices=("scheduling", "housing", "maxsat"))
    run.add_argument("--features", type=int, required=True)
    run.add_argument("--soft", type=int, required=True)
    run.add_argument("--runs", type=int, default=100)
    run.add_argument("--budget", type=int, default=100)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--variance", type=float, default=10.0)
    run.add_argument("--degree", type=int, default=3)
    run.add_argument("--out", required=True)
    run.set_defaults(func=_cmd_run)

    agg = sub.add_parser("aggregate", help="summarize a runs CSV")
    agg.add_argument("runs_csv")
    agg.add_argument("--out", required=True)
    agg.set_defaults(func=_cmd_aggregate)

    solve = sub.add_parser("solve", help="optimize a problem file")
    solve.add_argument("problem")
    solve.add_argument("--minimize", action="store_true")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("-v", "--verbose", action="store_true",
                       help="dump the boolean abstraction in DIMACS-like text")
    solve.set_defaults(func=_cmd_solve)

    enc = sub.add_parser("encode-scsp", help="encode a soft-constraint problem")
    enc.add_argument("scsp")
    enc.add_argument("--out", required=True)
    enc.add_argument("--merge", action="store_true",
                     help="merge equal-weight tuples into generalized clauses")
    enc.add_argument("--dimacs", help="also write a clause-only WDIMACS file")
    enc.set_defaults(func=_cmd_encode_scsp)

    serve = sub.add_parser("serve", help="start the HTTP session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=int(os.environ.get("CLEO_PORT", "8080")))
    serve.add_argument("--log-dir", default=None, help="directory for session event logs")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
