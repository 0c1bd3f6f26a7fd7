"""Base-pointed geodesic maps to Euclidean space.

Hyperbolic space is sent to the open unit ball by the Beltrami-Klein chart,
the open hemisphere around the base point to all of R^d by the gnomonic
(central) projection.  Both are built the same way: write a point as
``a * base + sum_i b_i E_i`` in an orthonormal frame at the base and return
``b / a``.  Both charts carry geodesics to straight lines and work at unit
curvature, so Euclidean lengths in the image are unit-curvature quantities.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .manifold import ManifoldSpec, TangentFrame

BOUNDARY_GAP = 1e-12
HEMISPHERE_GAP = 1e-9
MIN_NORMAL = 1e-14


class CutKind(str, enum.Enum):
    OBJECTIVE = "objective"
    FEASIBILITY = "feasibility"


@dataclass(frozen=True)
class EuclideanCut:
    """Halfspace {z : <normal, z - anchor> <= 0} kept by a cut at ``anchor``.

    ``value`` is the objective value at the query for objective cuts.
    """

    anchor: np.ndarray
    normal: np.ndarray
    kind: CutKind
    value: float | None = None

    def __post_init__(self):
        if not float(self.normal @ self.normal) > 0:
            raise GeometryError("cut normal must be nonzero")

    def keeps(self, z, tol=0.0):
        return np.dot(np.asarray(z) - self.anchor, self.normal) <= tol


class GeodesicMap:
    def __init__(self, spec: ManifoldSpec, base, frame: TangentFrame | None = None):
        self.spec = spec
        self.base = spec.check_point(base)
        self.frame = frame if frame is not None else spec.orthonormal_frame(self.base)
        # sign of the |y|^2 term in the normalization 1 -/+ |y|^2
        self._c = -1.0 if spec.hyperbolic else 1.0
        self._E = self.frame.vectors
        # model-dual rows so that p @ _dualE.T gives <p, E_i>
        self._dualE = self._E * spec.metric
        self._dual_base = self.base * spec.metric * (-1.0 if spec.hyperbolic else 1.0)

    def coefficients(self, p):
        """(a, b): the base coefficient and frame coefficients of ``p``."""
        p = np.asarray(p, dtype=float)
        return p @ self._dual_base, p @ self._dualE.T

    def forward(self, p):
        a, b = self.coefficients(p)
        if not self.spec.hyperbolic and np.any(a <= HEMISPHERE_GAP):
            raise GeometryError("point outside the open hemisphere around the base")
        y = b / np.asarray(a)[..., None]
        if np.ndim(y) == 1 and np.array_equal(p, self.base):
            return np.zeros(self.spec.dim)
        return y

    def _scale(self, y):
        q = 1.0 + self._c * np.sum(y * y, axis=-1)
        if self.spec.hyperbolic and np.any(q <= 2 * BOUNDARY_GAP):
            raise GeometryError("Klein coordinates on or beyond the unit sphere")
        return 1.0 / np.sqrt(q)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.spec.hyperbolic and np.any(np.linalg.norm(y, axis=-1) >= 1.0 - BOUNDARY_GAP):
            raise GeometryError("Klein coordinates on or beyond the unit sphere")
        s = self._scale(y)
        return s[..., None] * (self.base + y @ self._E)

    def jacobian(self, y):
        """d(inverse)/dy at a single ``y`` as a (d + 1, d) matrix."""
        y = np.asarray(y, dtype=float)
        s = self._scale(y)
        p = s * (self.base + y @ self._E)
        return s * self._E.T - self._c * s * s * np.outer(p, y)

    def lift(self, y):
        """(p, s): inverse(y) for a single in-domain ``y`` and its normalization factor."""
        q = 1.0 + self._c * float(y @ y)
        s = 1.0 / math.sqrt(q)
        return s * (self.base + y @ self._E), s

    def pullback_subgradient(self, y, g, kind=CutKind.OBJECTIVE, value=None, *,
                             lifted=None) -> EuclideanCut:
        """Euclidean cut at ``y`` whose halfspace is the image of {x : <g, log_p x> <= 0}.

        ``g`` is a tangent vector at p = inverse(y).  The normal is the row
        vector g^T G J(y), computed without forming J, and leaves unit length.
        """
        y = np.asarray(y, dtype=float)
        if lifted is None:
            self._scale(y)
            lifted = self.lift(y)
        p, s = lifted
        gd = g * self.spec.metric
        n = s * (self._E @ gd) - (self._c * s * s * float(p @ gd)) * y
        nn = math.sqrt(float(n @ n))
        if nn < MIN_NORMAL:
            raise GeometryError("pulled-back subgradient vanished (degenerate cut)")
        return EuclideanCut(anchor=y, normal=n / nn, kind=CutKind(kind), value=value)

    def ball_image_radius(self, radius):
        """Euclidean radius of the image of the geodesic ball B(base, radius)."""
        return image_radius(self.spec, radius)


def image_radius(spec: ManifoldSpec, radius):
    """tanh(radius sqrt K) for the Klein chart, tan(radius sqrt K) for the gnomonic one."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    t = radius * spec.scale
    if spec.hyperbolic:
        return math.tanh(t)
    if t >= math.pi / 2:
        raise GeometryError("spherical ball must have radius < pi / (2 sqrt(K))")
    return math.tan(t)
