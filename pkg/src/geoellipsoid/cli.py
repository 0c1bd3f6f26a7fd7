"""Command-line interface: ``geoellipsoid solve | bench | gen``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .baseline import BaselineConfig, run_baseline
from .errors import InstanceError
from .io import dumps, load_instance, rows_csv, trace_csv
from .solver import SolverConfig, solve

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


def _write(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.instance)
        if args.method == "ellipsoid":
            kw = {"subproblem_safety": args.safety}
            if args.max_queries is not None:
                kw["max_total_queries"] = args.max_queries
            cfg = SolverConfig(epsilon=args.epsilon, **kw)
        else:
            cfg = BaselineConfig(max_queries=args.max_queries or 10_000, step=args.step)
    except (InstanceError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT

    if args.method == "ellipsoid":
        res = solve(inst, cfg)
        complete, stages = res.complete, res.stages
    else:
        res = run_baseline(inst, cfg)
        complete, stages = True, 0
    out = {
        "method": args.method,
        "epsilon": args.epsilon,
        "complete": complete,
        "f_best": res.f_best,
        "queries_used": res.queries_used,
        "stages": stages,
        "gap_target": args.epsilon * inst.lipschitz * inst.radius,
        "x_best": res.x_best.tolist(),
        "x_best_coords": inst.coords(res.x_best).tolist(),
    }
    _write(args.out, dumps(out))
    if args.trace:
        _write(args.trace, trace_csv(res.trace))
    if not complete:
        print("warning: query budget exhausted; best-so-far reported", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        suite, root = bench.load_suite(args.suite)
        rows = bench.run_suite(suite, root, threads=args.threads)
    except InstanceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dicts = bench.summary_dicts(rows)
    (out / "summary.csv").write_text(rows_csv(bench.SUMMARY_COLUMNS, dicts))
    (out / "timings.csv").write_text(rows_csv(bench.TIMING_COLUMNS, dicts))
    (out / "scaling.json").write_text(dumps(bench.scaling_report(rows)))
    failed = [r for r in rows if r.status.startswith("error")]
    for r in failed:
        print(f"{r.instance} {r.method} eps={r.epsilon:g}: {r.status}", file=sys.stderr)
    return EXIT_INPUT if failed else EXIT_OK


def cmd_gen(args) -> int:
    try:
        data = bench.generate_instance(args.manifold, args.dim, args.radius, args.problem,
                                       args.points, args.seed, args.curvature)
    except (InstanceError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    _write(args.out, dumps(data))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoellipsoid", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one problem instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--method", choices=("ellipsoid", "subgradient"), default="ellipsoid")
    s.add_argument("--max-queries", type=int)
    s.add_argument("--safety", type=float, default=4.0, help="subproblem budget multiplier")
    s.add_argument("--step", type=float, help="constant step for the subgradient method")
    s.add_argument("--trace", help="trace CSV path")
    s.add_argument("--out", help="result JSON path (default: stdout)")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, help="suite JSON file, or 'default'")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--threads", type=int, help="worker processes (env GEOELLIPSOID_THREADS)")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="generate a random problem instance")
    g.add_argument("--manifold", choices=("hyperbolic", "spherical"), required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--radius", type=float, required=True)
    g.add_argument("--curvature", type=float, default=1.0)
    g.add_argument("--problem", choices=("median", "maxdist"), required=True)
    g.add_argument("--points", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", help="instance JSON path (default: stdout)")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
