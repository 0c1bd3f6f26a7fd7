"""Benchmark suites: instance generation, per-cell runs, summary rows and scaling fits."""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .baseline import BaselineConfig, run_baseline
from .errors import InstanceError
from .io import instance_from_dict, load_instance
from .manifold import Kind
from .problems import ProblemInstance
from .reference import reference_optimum
from .solver import SolverConfig, solve

SUMMARY_COLUMNS = ("instance", "method", "manifold", "dim", "curvature", "radius", "problem",
                   "epsilon", "queries_used", "queries_to_target", "f_best", "f_star",
                   "final_gap", "gap_target", "status")
TIMING_COLUMNS = ("instance", "method", "epsilon", "wall_time")
METHODS = ("ellipsoid", "subgradient")


@dataclass
class RunSummary:
    instance: str
    method: str
    manifold: str
    dim: int
    curvature: float
    radius: float
    problem: str
    epsilon: float
    queries_used: int | None
    queries_to_target: int | None
    f_best: float | None
    f_star: float | None
    final_gap: float | None
    gap_target: float | None
    status: str
    wall_time: float = 0.0


def generate_instance(manifold, dim, radius, problem, points, seed, curvature=1.0) -> dict:
    """Random instance dict: anchors uniform in the tangent-coordinate ball of radius 0.9 r."""
    kind = Kind(manifold)
    if kind is Kind.SPHERICAL and radius >= math.pi / 2 / math.sqrt(curvature):
        raise InstanceError("spherical radius must be < pi / (2 sqrt(K))")
    if problem not in ("median", "maxdist"):
        raise InstanceError(f"unknown problem '{problem}'")
    if points < 1:
        raise InstanceError("need at least one point")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((points, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = 0.9 * radius * rng.uniform(size=points) ** (1.0 / dim)
    coords = dirs * radii[:, None]
    objective = {"type": problem, "points": coords.tolist()}
    if problem == "median":
        objective["weights"] = [1.0] * points
    return {"manifold": kind.value, "dim": dim, "curvature": float(curvature),
            "radius": float(radius), "objective": objective}


def default_suite() -> dict:
    return json.loads(resources.files("geoellipsoid").joinpath("data/default_suite.json").read_text())


def load_suite(path):
    if str(path) == "default":
        return default_suite(), Path(".")
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as err:
        raise InstanceError(f"{path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise InstanceError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    return data, path.parent


def _suite_instances(suite, root):
    out = []
    for i, entry in enumerate(suite.get("instances", [])):
        ident = entry.get("id", f"instance{i}")
        if "path" in entry:
            out.append((ident, ("path", str(root / entry["path"]))))
        elif "instance" in entry:
            out.append((ident, ("dict", entry["instance"])))
        elif "gen" in entry:
            out.append((ident, ("dict", generate_instance(**entry["gen"]))))
        else:
            raise InstanceError(f"suite instance {i}: needs 'path', 'instance' or 'gen'")
    if not out:
        raise InstanceError("suite lists no instances")
    return out


def _materialize(source) -> ProblemInstance:
    how, what = source
    return load_instance(what) if how == "path" else instance_from_dict(what)


def first_query_reaching(trace, level):
    for row in trace.rows:
        if row[5] is not None and row[5] <= level:
            return row[0] + 1
    return None


def run_cell(ident, source, method, epsilon, options) -> RunSummary:
    """One suite cell; failures are reported in ``status`` instead of raising."""
    base = dict(instance=ident, method=method, epsilon=epsilon, manifold="", dim=0,
                curvature=0.0, radius=0.0, problem="", queries_used=None,
                queries_to_target=None, f_best=None, f_star=None, final_gap=None,
                gap_target=None)
    t0 = time.perf_counter()
    try:
        inst = _materialize(source)
        base.update(manifold=inst.spec.kind.value, dim=inst.spec.dim,
                    curvature=inst.spec.curvature, radius=inst.radius, problem=inst.kind)
        ref = reference_optimum(inst, cross_check=False)
        target = epsilon * inst.lipschitz * inst.radius
        if method == "ellipsoid":
            cfg = SolverConfig(epsilon=epsilon,
                               subproblem_safety=options.get("subproblem_safety", 4.0),
                               max_total_queries=options.get("max_total_queries", 50_000_000))
            res = solve(inst, cfg)
            status = "ok" if res.complete else "incomplete"
            used, f_best, trace = res.queries_used, res.f_best, res.trace
        elif method == "subgradient":
            cfg = BaselineConfig(max_queries=options.get("subgradient_max_queries", 20_000),
                                 step=options.get("subgradient_step"))
            res = run_baseline(inst, cfg)
            trace = res.trace
            reached = first_query_reaching(trace, ref.f_star + target)
            status = "ok" if reached is not None else "incomplete"
            used, f_best = res.queries_used, res.f_best
        else:
            raise InstanceError(f"unknown method '{method}'")
        base.update(queries_used=used, f_best=f_best, f_star=ref.f_star,
                    final_gap=f_best - ref.f_star, gap_target=target,
                    queries_to_target=first_query_reaching(trace, ref.f_star + target),
                    status=status)
    except Exception as err:  # recorded per row; the bench exit code reports it
        base["status"] = f"error: {type(err).__name__}: {err}".replace("\n", " ")
    return RunSummary(**base, wall_time=time.perf_counter() - t0)


def _run_cell_args(args):
    return run_cell(*args)


def run_suite(suite, root=Path("."), threads=None) -> list:
    instances = _suite_instances(suite, root)
    epsilons = [float(e) for e in suite.get("epsilons", [1e-3])]
    methods = suite.get("methods", ["ellipsoid"])
    options = suite.get("options", {})
    cells = [(ident, src, m, eps, options)
             for ident, src in instances for eps in epsilons for m in methods]
    if threads is None:
        threads = int(os.environ.get("GEOELLIPSOID_THREADS", "1") or 1)
    if threads <= 1:
        return [run_cell(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_cell_args, cells))


def _slope(xs, ys):
    xs, ys = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(xs, ys, 1)[0])


def _grouped_slopes(rows, vary, transform):
    groups = {}
    keys = ("manifold", "curvature", "radius", "problem", "dim", "epsilon")
    if vary == "epsilon":
        # accuracy sweeps are fitted per instance
        keys = ("instance",) + keys
    for r in rows:
        k = tuple(getattr(r, f) for f in keys if f != vary)
        groups.setdefault(k, []).append(r)
    slopes = []
    for members in groups.values():
        xs = [transform(getattr(r, vary)) for r in members]
        if len(set(xs)) < 2:
            continue
        slopes.append(_slope(xs, [r.queries_used for r in members]))
    return slopes


def scaling_report(rows) -> dict:
    """Log-log slopes of ellipsoid query counts against d, log(1/eps) and r.

    Each slope is fitted within groups that share every other parameter;
    reported values are the group means (``None`` when nothing varies).
    """
    ok = [r for r in rows if r.method == "ellipsoid" and r.status == "ok" and r.queries_used]
    out = {}
    for name, vary, transform in (("dim", "dim", float),
                                  ("log_inv_epsilon", "epsilon", lambda e: math.log(1 / e)),
                                  ("radius", "radius", float)):
        slopes = _grouped_slopes(ok, vary, transform)
        out[f"exponent_{name}"] = float(np.mean(slopes)) if slopes else None
        out[f"groups_{name}"] = len(slopes)
    return out


def summary_dicts(rows):
    return [asdict(r) for r in rows]
