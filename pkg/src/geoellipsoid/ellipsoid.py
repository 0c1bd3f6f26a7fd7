"""Central-cut ellipsoid method in R^d.

An ellipsoid is E = {y : (y - c)^T P^{-1} (y - c) <= 1} with the shape matrix
P stored directly.  One update costs a matrix-vector product and a rank-one
correction; the only factorization is a periodic health check that runs
every ``d`` iterations outside :func:`central_cut_update`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConditioningError, DegenerateCutError, EllipsoidCollapse
from .geodesic_map import CutKind, EuclideanCut

MIN_SPREAD = 1e-300
MIN_CONDITION = 1e-14


@dataclass(frozen=True)
class Ellipsoid:
    center: np.ndarray
    shape: np.ndarray
    logdet: float

    @classmethod
    def ball(cls, center, radius):
        center = np.asarray(center, dtype=float)
        d = center.shape[0]
        return cls(center.copy(), radius**2 * np.eye(d), 2 * d * math.log(radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def membership(self, y):
        """(y - c)^T P^{-1} (y - c); <= 1 inside.  Factorizes P: not for hot loops."""
        r = np.asarray(y, dtype=float) - self.center
        return float(r @ np.linalg.solve(self.shape, r))

    def exact_logdet(self):
        return float(np.linalg.slogdet(self.shape)[1])


def log_volume_step(d):
    """Exact change of log det P per central cut in dimension d."""
    return d * math.log(d * d / (d * d - 1.0)) + math.log((d - 1.0) / (d + 1.0))


def central_cut_update(E: Ellipsoid, a) -> Ellipsoid:
    """Minimum-volume ellipsoid containing E intersected with {y : <a, y - c> <= 0}."""
    d = E.dim
    if d < 2:
        raise ValueError("central cuts need dimension >= 2")
    P = E.shape
    Pa = P @ a
    spread = float(a @ Pa)
    if not spread > MIN_SPREAD:
        raise DegenerateCutError(f"a^T P a = {spread:.3e}: ellipsoid collapsed along the cut")
    at = Pa / math.sqrt(spread)
    center = E.center - at / (d + 1)
    shape = P - (2.0 / (d + 1)) * np.outer(at, at)
    shape += shape.T
    shape *= 0.5 * d * d / (d * d - 1.0)
    return Ellipsoid(center, shape, E.logdet + log_volume_step(d))


@dataclass
class EngineStep:
    iteration: int
    center: np.ndarray
    kind: CutKind
    value: Optional[float]


@dataclass
class EngineResult:
    best_y: Optional[np.ndarray]
    best_value: Optional[float]
    best_iteration: Optional[int]
    iterations: int
    ellipsoid: Ellipsoid
    trace: list = field(default_factory=list)
    stopped_by_oracle: bool = False

    @property
    def found(self):
        return self.best_y is not None


CutOracle = Callable[[np.ndarray], Optional[EuclideanCut]]


def health_check(E: Ellipsoid) -> Ellipsoid:
    """Recompute log det from the spectrum and reject near-singular shapes."""
    w = np.linalg.eigvalsh(E.shape)
    if not w[0] > 0 or w[0] / w[-1] < MIN_CONDITION:
        raise ConditioningError(
            f"shape matrix condition {w[0] / w[-1]:.3e} below {MIN_CONDITION:g}")
    return Ellipsoid(E.center, E.shape, float(np.sum(np.log(w))))


def run(E0: Ellipsoid, oracle: CutOracle, max_iters: int, *, check_every: int | None = None,
        keep_trace: bool = True) -> EngineResult:
    """Run the ellipsoid method for at most ``max_iters`` oracle queries.

    The oracle receives the current center and returns a cut, or ``None`` to
    stop.  Objective cuts must carry the value at the query; the feasible
    query with the smallest value is returned (earliest wins ties).

    Raises an :class:`EllipsoidCollapse` subclass if the shape degenerates;
    the run state at that point is attached as ``err.partial``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    check_every = check_every or E0.dim
    E = E0
    res = EngineResult(None, None, None, 0, E0)
    for k in range(max_iters):
        y = E.center
        cut = oracle(y)
        res.iterations = k + 1
        if cut is None:
            res.stopped_by_oracle = True
            if keep_trace:
                res.trace.append(EngineStep(k, y, None, None))
            break
        if keep_trace:
            res.trace.append(EngineStep(k, y, cut.kind, cut.value))
        if cut.kind is CutKind.OBJECTIVE and (res.best_value is None or cut.value < res.best_value):
            res.best_y, res.best_value, res.best_iteration = y, cut.value, k
        try:
            E = central_cut_update(E, cut.normal)
            if (k + 1) % check_every == 0:
                E = health_check(E)
        except EllipsoidCollapse as err:
            res.ellipsoid = E
            err.partial = res
            raise
    res.ellipsoid = E
    return res
