"""High-accuracy reference optima computed independently of the ellipsoid solver.

Closed forms cover the analytically solvable cases.  Otherwise geometric
medians are found by a Riemannian Weiszfeld iteration and max-distance
problems by SLSQP on the epigraph form in a geodesic chart; the result can
additionally be cross-checked against a tight run of the full solver.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ReferenceDisagreementError
from .geodesic_map import GeodesicMap
from .problems import DistanceTo, GeometricMedian, MaxDistance, ProblemInstance

log = logging.getLogger(__name__)

COLLINEAR_TOL = 1e-10


@dataclass(frozen=True)
class ReferenceOptimum:
    f_star: float
    x_star: np.ndarray
    method: str


def _collinear_params(instance: ProblemInstance):
    """Arc-length parameters of the anchors along one geodesic, or None.

    Anchors are collinear on the manifold iff their chart images at x_ref are
    collinear in R^d.
    """
    spec = instance.spec
    pts = instance.anchors
    if len(pts) < 2:
        return None
    gmap = GeodesicMap(spec, instance.x_ref, instance.frame)
    y = gmap.forward(pts)
    diffs = y - y[0]
    far = int(np.argmax(np.linalg.norm(diffs, axis=1)))
    if np.linalg.norm(diffs[far]) == 0:
        return None
    direction = diffs[far] / np.linalg.norm(diffs[far])
    resid = diffs - np.outer(diffs @ direction, direction)
    if np.max(np.linalg.norm(resid, axis=1)) > COLLINEAR_TOL:
        return None
    # signed arc length from anchor 0 along the geodesic toward the far anchor
    d0 = spec.dist(pts[0], pts)
    sign = np.where(diffs @ direction >= 0, 1.0, -1.0)
    return pts[0], pts[far], d0 * sign, float(d0[far])


def _point_on(spec, start, toward, length, t):
    """Point at signed arc length t from ``start`` on the geodesic through ``toward``."""
    v = spec.log(start, toward)
    return spec.exp(start, (t / length) * v)


def _closed_form(instance: ProblemInstance):
    spec = instance.spec
    obj = instance.objective
    pts = instance.anchors
    if isinstance(obj, DistanceTo) or len(pts) == 1:
        return ReferenceOptimum(0.0, pts[0].copy(), "closed-form: anchor")
    line = _collinear_params(instance)
    if line is None:
        return None
    start, far, t, length = line
    if isinstance(obj, MaxDistance):
        lo, hi = float(t.min()), float(t.max())
        mid = 0.5 * (lo + hi)
        x = _point_on(spec, start, far, length, mid)
        return ReferenceOptimum(instance.value(x), x, "closed-form: midpoint of extreme anchors")
    # weighted 1-D median along the geodesic: a piecewise-linear convex function of
    # the arc parameter, minimized at an anchor
    w = instance.weights
    costs = np.abs(t[:, None] - t[None, :]).T @ w
    best = costs.min()
    ties = np.flatnonzero(costs <= best * (1 + 1e-14) + 1e-300)
    if len(ties) > 1:
        # flat segment between tied anchors: every point on it is optimal; report its center
        mid = 0.5 * (t[ties].min() + t[ties].max())
        x = _point_on(spec, start, far, length, mid)
    else:
        x = pts[ties[0]].copy()
    return ReferenceOptimum(instance.value(x), x, "closed-form: weighted median on a geodesic")


def _curvature_weights(spec, d):
    """Bound on the transverse Hessian of dist(., p) at distance d.

    1/d in flat space; sqrt(K) coth(sqrt(K) d) >= 1/d on hyperbolic space, where
    the plain Weiszfeld step would overshoot.  On the sphere 1/d already bounds it.
    """
    if not spec.hyperbolic:
        return 1.0 / d
    t = spec.scale * d
    return spec.scale / np.tanh(t)


def weiszfeld(instance: ProblemInstance, *, tol=1e-15, max_iter=100_000):
    """Riemannian Weiszfeld iteration for the weighted geometric median.

    The step is the weighted mean of the anchor directions divided by a
    curvature bound, which makes it a damped gradient step on hyperbolic space.
    """
    spec = instance.spec
    pts, w = instance.anchors, instance.weights
    values = [instance.value(p) for p in pts]
    x = pts[int(np.argmin(values))].copy()
    for _ in range(max_iter):
        d = spec.dist(x, pts)
        v = spec.log(x, pts)
        hit = d < 1e-12
        if np.any(hit):
            i = int(np.flatnonzero(hit)[0])
            rest = np.delete(np.arange(len(pts)), i)
            pull = (w[rest] / d[rest]) @ v[rest]
            # anchor i is optimal iff the other terms' pull is at most its weight
            if spec.norm(pull) <= w[i]:
                return x
            # leave the anchor along the steepest descent direction
            step = (spec.norm(pull) - w[i]) / np.sum(w[rest] * _curvature_weights(spec, d[rest]))
            x = spec.exp(x, step * pull / spec.norm(pull))
            continue
        step = ((w / d) @ v) / np.sum(w * _curvature_weights(spec, d))
        x = spec.exp(x, step)
        if spec.norm(step) < tol:
            break
    return x


def minimax_slsqp(instance: ProblemInstance):
    """Minimize max_i dist(x, p_i) as SLSQP on (chart coordinates, t)."""
    spec = instance.spec
    pts = instance.anchors
    # chart centered at the midpoint of the farthest anchor pair
    i, j = np.unravel_index(np.argmax(spec.dist(pts[:, None, :], pts[None, :, :])),
                            (len(pts), len(pts)))
    center = spec.geodesic(pts[i], pts[j], 0.5)
    gmap = GeodesicMap(spec, center)
    radius = float(np.max(spec.dist(center, pts)))

    def point(z):
        return gmap.inverse(z[:-1])

    def cons(z):
        return z[-1] - spec.dist(point(z), pts)

    def cons_jac(z):
        y = z[:-1]
        p = gmap.inverse(y)
        J = gmap.jacobian(y)
        v = spec.log(p, pts)
        d = spec.dist(p, pts)
        grads = -(v / d[:, None])
        # d dist / dy = <grad, J>
        dy = (grads * spec.metric) @ J
        return np.hstack([-dy, np.ones((len(pts), 1))])

    z0 = np.concatenate([np.zeros(spec.dim), [radius * 1.01]])
    best = None
    for _ in range(3):
        res = minimize(lambda z: z[-1], z0, jac=lambda z: np.eye(len(z))[-1], method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                       options={"ftol": 1e-16, "maxiter": 2000})
        x = point(res.x)
        val = instance.value(x)
        if best is None or val < best[1]:
            best = (x, val)
        # re-center the chart at the current solution and polish
        gmap = GeodesicMap(spec, x)
        z0 = np.concatenate([np.zeros(spec.dim), [val]])
    return best[0]


def _numerical(instance: ProblemInstance):
    if isinstance(instance.objective, GeometricMedian):
        x = weiszfeld(instance)
        method = "weiszfeld"
        at_anchor = np.any(instance.spec.dist(x, instance.anchors) < 1e-12)
        if not at_anchor and instance.spec.norm(instance.evaluate(x).g) > 1e-6 * instance.lipschitz:
            raise ReferenceDisagreementError("weiszfeld iteration did not reach a stationary point")
    else:
        x = minimax_slsqp(instance)
        method = "slsqp-minimax"
    if not instance.contains(x, tol=1e-9):
        raise ReferenceDisagreementError(f"{method} optimum left the constraint ball")
    return ReferenceOptimum(instance.value(x), x, method)


def reference_optimum(instance: ProblemInstance, tolerance=1e-9, *,
                      cross_check=True) -> ReferenceOptimum:
    """Optimal value and a minimizer, accurate to well below ``tolerance``.

    With ``cross_check`` the independent estimate is compared with the full
    solver run at an absolute target of ``1e-3 * tolerance`` and the lower
    value is returned.  A solver value more than ``tolerance`` below the
    estimate is an error, and so is one more than ``tolerance`` above it
    unless some stage ended in ellipsoid collapse (float resolution reached
    before the target, typical when every cut is parallel).
    """
    if tolerance < 1e-10:
        raise ValueError("tolerance must be >= 1e-10")
    ref = _closed_form(instance)
    if ref is None:
        ref = _numerical(instance)
    if not cross_check:
        return ref
    from .solver import SolverConfig, solve

    eps = min(0.5, 1e-3 * tolerance / (instance.lipschitz * instance.radius))
    res = solve(instance, SolverConfig(epsilon=eps), keep_trace=False)
    collapsed = any(st.collapsed for st in res.stage_results)
    if ref.f_star - res.f_best > tolerance or (res.f_best - ref.f_star > tolerance
                                               and not collapsed):
        raise ReferenceDisagreementError(
            f"{ref.method} gives {ref.f_star!r}, solver gives {res.f_best!r}")
    if res.f_best < ref.f_star:
        return ReferenceOptimum(res.f_best, res.x_best, ref.method + "+solver")
    return ref
