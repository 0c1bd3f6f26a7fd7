"""Geodesically convex test problems with exact subgradient oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .manifold import ManifoldSpec, TangentFrame

BALL_TOL = 1e-12


@dataclass(frozen=True)
class DistanceTo:
    point: np.ndarray


@dataclass(frozen=True)
class GeometricMedian:
    points: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class MaxDistance:
    points: np.ndarray


Objective = Union[DistanceTo, GeometricMedian, MaxDistance]


@dataclass(frozen=True)
class SubgradientResult:
    value: float
    g: np.ndarray


@dataclass(frozen=True)
class ProblemInstance:
    """Minimize a g-convex objective over the closed ball B(x_ref, radius)."""

    spec: ManifoldSpec
    x_ref: np.ndarray
    radius: float
    objective: Objective
    frame: TangentFrame = field(default=None, repr=False)
    anchors: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        spec = self.spec
        x_ref = spec.check_point(self.x_ref)
        object.__setattr__(self, "x_ref", x_ref)
        if self.frame is None:
            object.__setattr__(self, "frame", spec.orthonormal_frame(x_ref))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not spec.hyperbolic and self.radius >= math.pi / 2 / spec.scale - 1e-9:
            raise ValueError("spherical radius must be < pi / (2 sqrt(K)) for a g-convex ball")

        obj = self.objective
        if isinstance(obj, DistanceTo):
            anchors = np.atleast_2d(obj.point)
            weights = np.ones(1)
        elif isinstance(obj, GeometricMedian):
            anchors = np.atleast_2d(obj.points)
            weights = np.asarray(obj.weights, dtype=float)
            if weights.shape != (anchors.shape[0],) or np.any(weights <= 0):
                raise ValueError("median weights must be positive, one per point")
        elif isinstance(obj, MaxDistance):
            anchors = np.atleast_2d(obj.points)
            weights = np.ones(anchors.shape[0])
        else:
            raise TypeError(f"unknown objective {type(obj).__name__}")
        anchors = spec.check_point(np.asarray(anchors, dtype=float))
        if len(anchors) == 0:
            raise ValueError("objective needs at least one point")
        far = spec.dist(x_ref, anchors) > self.radius + 1e-9
        if np.any(far):
            raise ValueError("all anchor points must lie in the constraint ball")
        anchors.setflags(write=False)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "weights", weights)
        # precomputed model duals of the anchors for vectorized inner products
        object.__setattr__(self, "_dual", anchors * spec.metric)
        # x is certainly inside the ball when its base coefficient relative to
        # x_ref is below this level (cosh or -cos of the radius, with margin)
        t = self.radius * spec.scale
        if spec.hyperbolic:
            object.__setattr__(self, "_ref_dual", -x_ref * spec.metric)
            object.__setattr__(self, "_inside_level", math.cosh(t) * (1 - 1e-10))
        else:
            object.__setattr__(self, "_ref_dual", -x_ref)
            object.__setattr__(self, "_inside_level", -math.cos(t) - 1e-10)

    @property
    def lipschitz(self) -> float:
        if isinstance(self.objective, GeometricMedian):
            return float(np.sum(np.abs(self.weights)))
        return 1.0

    @property
    def kind(self) -> str:
        return {DistanceTo: "distance", GeometricMedian: "median",
                MaxDistance: "maxdist"}[type(self.objective)]

    def value(self, x) -> float:
        return self.evaluate(x).value

    def _unit_pulls(self, x):
        """Distances to the anchors and unit vectors at x pointing away from them."""
        spec = self.spec
        a = self._dual @ x
        if spec.hyperbolic:
            a = -a
        u = self.anchors - a[:, None] * x
        s = np.sqrt(np.maximum((u * u) @ spec.metric, 0.0))
        same = np.all(self.anchors == x, axis=1)
        if same.any():
            s = np.where(same, 0.0, s)
            u[same] = 0.0
        if spec.hyperbolic:
            theta = np.where(a > 2.0, np.arccosh(np.maximum(a, 1.0)), np.arcsinh(s))
        else:
            theta = np.arctan2(s, a)
        dist = theta / spec.scale
        if s.min() > 0:
            away = u / -s[:, None]
        else:
            away = u / -np.where(s > 0, s, 1.0)[:, None]
        return dist, away, s

    def _fallback_direction(self, x):
        return self.spec.orthonormal_frame(x).vectors[0]

    def evaluate(self, x) -> SubgradientResult:
        """Objective value and a Riemannian subgradient at ``x``."""
        dist, away, s = self._unit_pulls(x)
        at_anchor = s == 0
        if isinstance(self.objective, MaxDistance):
            i = int(np.argmax(dist))
            g = self._fallback_direction(x) if at_anchor[i] else away[i]
            return SubgradientResult(float(dist[i]), self.spec.project_tangent(x, g))
        w = self.weights
        value = float(w @ dist)
        if np.any(at_anchor):
            away = away.copy()
            away[at_anchor] = 0.0
            g = w @ away
            if len(w) == 1:
                g = w[0] * self._fallback_direction(x)
        else:
            g = w @ away
        return SubgradientResult(value, self.spec.project_tangent(x, g))

    def constraint_oracle(self, x):
        """None if ``x`` is in the ball, else a subgradient of dist(., x_ref) at ``x``."""
        spec = self.spec
        a = float(self._ref_dual @ x)
        if a <= self._inside_level:
            return None
        d = float(spec.dist(x, self.x_ref))
        if d <= self.radius + BALL_TOL:
            return None
        return -spec.log(x, self.x_ref) / d

    def contains(self, x, tol=1e-9):
        return bool(self.spec.dist(self.x_ref, x) <= self.radius + tol)

    def point(self, coords):
        """Point from tangent coordinates at x_ref in the canonical frame."""
        return self.spec.point_from_tangent_coords(self.x_ref, self.frame, coords)

    def coords(self, p):
        return self.spec.tangent_coords(self.x_ref, self.frame, p)
