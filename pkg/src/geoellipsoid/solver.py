"""Multi-stage ellipsoid-like method on hyperbolic space and the hemisphere.

Each stage minimizes the objective over B(x_k, R) intersected with the
constraint ball, where R = 1/sqrt(K).  The stage problem is pulled back to
R^d through a geodesic map based at x_k and solved by the central-cut
ellipsoid method started from the exact image of B(x_k, R).  When the
constraint radius is at most R a single stage centered at x_ref suffices.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ellipsoid as engine
from .errors import EllipsoidCollapse, NoFeasibleQueryError
from .geodesic_map import CutKind, EuclideanCut, GeodesicMap, image_radius
from .problems import ProblemInstance

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("query", "stage", "inner_iter", "feasible", "value", "best")
ZERO_SUBGRADIENT = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    subproblem_safety: float = 4.0
    max_total_queries: int = 50_000_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.subproblem_safety >= 1:
            raise ValueError("subproblem_safety must be >= 1")
        if self.max_total_queries < 1:
            raise ValueError("max_total_queries must be positive")


@dataclass
class Trace:
    """Per-query rows (query, stage, inner_iter, feasible, value, best)."""

    rows: list = field(default_factory=list)

    def append(self, query, stage, inner_iter, feasible, value, best):
        self.rows.append((query, stage, inner_iter, feasible, value, best))

    def __len__(self):
        return len(self.rows)

    def best_values(self):
        return np.array([np.nan if r[5] is None else r[5] for r in self.rows])

    def stage_rows(self, stage):
        return [r for r in self.rows if r[1] == stage]


@dataclass
class StageResult:
    x: np.ndarray
    value: float
    queries: int
    budget: int
    collapsed: bool = False
    truncated: bool = False


@dataclass
class SolveResult:
    x_best: np.ndarray
    f_best: float
    queries_used: int
    stages: int
    trace: Trace
    complete: bool = True
    planned_stages: int = 0
    stage_results: list = field(default_factory=list)


def zeta(r, K):
    """(r sqrt K) / tanh(r sqrt K), the curvature factor of the query bound."""
    t = r * math.sqrt(K)
    if not t > 0:
        raise ValueError("r and K must be positive")
    if t < 1e-4:
        return 1.0 + t * t / 3.0
    return t / math.tanh(t)


def stage_count(r, K, epsilon):
    """Outer stage count ceil((2 r / R) ln(2 / epsilon)) with R = 1/sqrt(K)."""
    return math.ceil(2.0 * r * math.sqrt(K) * math.log(2.0 / epsilon))


def lipschitz_distortion(spec, radius):
    """Bound on the stretch of the inverse chart over the image of B(base, radius)."""
    t = radius * spec.scale
    if spec.hyperbolic:
        return math.cosh(t) ** 2
    return 1.0 + math.tan(t) ** 2


def subproblem_budget(instance: ProblemInstance, radius, eps_sub, safety):
    """Ellipsoid iterations N for one stage over a geodesic ball of ``radius``."""
    spec = instance.spec
    d = spec.dim
    r_img = image_radius(spec, radius)
    lip = instance.lipschitz * lipschitz_distortion(spec, radius)
    eps_unit = eps_sub * spec.scale
    return math.ceil(safety * 2 * d * (d + 1) * math.log(lip * r_img / eps_unit + math.e))


class _StageOracle:
    """Composite cut oracle for one stage: image ball, constraint ball, objective."""

    def __init__(self, instance, gmap, image_radius, stage, counter, trace, best):
        self.instance = instance
        self.gmap = gmap
        self.image_radius = image_radius
        self.stage = stage
        self.counter = counter
        self.trace = trace
        self.best = best
        self.inner = 0
        self.best_local = None
        self.metric = instance.spec.metric

    def _record(self, feasible, value):
        b = self.best
        if feasible and (b[0] is None or value < b[0]):
            b[0] = value
        self.counter[0] += 1
        if self.trace is not None:
            self.trace.append(self.counter[0] - 1, self.stage, self.inner, feasible, value, b[0])
        self.inner += 1

    def __call__(self, y):
        ny = math.sqrt(float(y @ y))
        if ny > self.image_radius:
            self._record(False, None)
            return EuclideanCut(y, y / ny, CutKind.FEASIBILITY)
        lifted = self.gmap.lift(y)
        p = lifted[0]
        gh = self.instance.constraint_oracle(p)
        if gh is not None:
            self._record(False, None)
            return self.gmap.pullback_subgradient(y, gh, CutKind.FEASIBILITY, lifted=lifted)
        res = self.instance.evaluate(p)
        self._record(True, res.value)
        if self.best_local is None or res.value < self.best_local[1]:
            self.best_local = (p, res.value)
        g = res.g
        if float((g * g) @ self.metric) < ZERO_SUBGRADIENT**2:
            # zero subgradient: p minimizes the objective
            return None
        return self.gmap.pullback_subgradient(y, g, CutKind.OBJECTIVE, res.value, lifted=lifted)


def solve_subproblem(instance: ProblemInstance, x_k, radius, eps_sub, *, safety=4.0,
                     max_queries=None, stage=0, trace: Optional[Trace] = None,
                     counter=None, best=None) -> StageResult:
    """Approximately minimize the objective over B(x_k, radius) intersected with the constraint.

    ``eps_sub`` is the target gap in physical objective units.  Returns the
    best feasible query of the stage.
    """
    spec = instance.spec
    gmap = GeodesicMap(spec, x_k)
    r_img = gmap.ball_image_radius(radius)
    budget = subproblem_budget(instance, radius, eps_sub, safety)
    n_iter = budget if max_queries is None else min(budget, max_queries)
    counter = [0] if counter is None else counter
    best = [None] if best is None else best
    oracle = _StageOracle(instance, gmap, r_img, stage, counter, trace, best)
    E0 = engine.Ellipsoid.ball(np.zeros(spec.dim), r_img)
    collapsed = False
    try:
        engine.run(E0, oracle, n_iter, keep_trace=False)
    except EllipsoidCollapse as err:
        # the ellipsoid shrank past floating-point resolution; keep what we found
        log.debug("stage %d: ellipsoid collapsed after %d queries (%s)", stage, oracle.inner, err)
        collapsed = True
    if oracle.best_local is None:
        raise NoFeasibleQueryError("stage produced no feasible query")
    x, value = oracle.best_local
    truncated = n_iter < budget and oracle.inner >= n_iter and not collapsed
    return StageResult(x, value, oracle.inner, budget, collapsed, truncated)


def solve(instance: ProblemInstance, config: SolverConfig, *, keep_trace=True) -> SolveResult:
    """Minimize to f(x) - f* <= epsilon * M * r."""
    spec = instance.spec
    R = 1.0 / spec.scale
    r = instance.radius
    eps = config.epsilon
    M = instance.lipschitz
    trace = Trace() if keep_trace else None
    counter = [0]
    best = [None]
    x_best, f_best = None, math.inf
    stages = []

    if r <= R:
        plan = [(instance.x_ref, r, eps * M * r)]
        n_stages = 1
    else:
        plan = None
        n_stages = stage_count(r, spec.curvature, eps)

    x_k = instance.x_ref
    complete = True
    for k in range(n_stages):
        center, radius, eps_sub = plan[k] if plan else (x_k, R, eps / 4.0 * M * R)
        remaining = config.max_total_queries - counter[0]
        if remaining <= 0:
            complete = False
            break
        st = solve_subproblem(instance, center, radius, eps_sub, safety=config.subproblem_safety,
                              max_queries=remaining, stage=k, trace=trace, counter=counter,
                              best=best)
        stages.append(st)
        if st.value < f_best:
            x_best, f_best = st.x, st.value
        if st.truncated:
            complete = False
            break
        x_k = st.x

    return SolveResult(x_best=x_best, f_best=f_best, queries_used=counter[0], stages=len(stages),
                       trace=trace if trace is not None else Trace(), complete=complete,
                       planned_stages=n_stages, stage_results=stages)
