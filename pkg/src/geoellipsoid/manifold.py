"""Constant-curvature geometry on the hyperboloid and the unit sphere.

Points and tangent vectors are plain ``numpy`` arrays whose last axis has
length ``d + 1``; every operation broadcasts over leading axes.  Coordinates
are always those of the unit-curvature model.  Lengths that enter or leave
the public functions (distances, tangent-vector norms, tangent coordinates)
are physical lengths at curvature ``K``, so a unit-curvature quantity ``t``
corresponds to a physical length ``t / sqrt(K)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

MODEL_TOL = 1e-9
SERIES_CUTOFF = 1e-6
ANTIPODAL_GAP = 1e-6


class Kind(str, enum.Enum):
    HYPERBOLIC = "hyperbolic"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal basis of the tangent space at ``base``.

    ``vectors`` has shape ``(d, d + 1)``; row ``i`` is the ambient vector E_i.
    """

    base: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]


@dataclass(frozen=True)
class ManifoldSpec:
    """A d-dimensional space of constant curvature -K (hyperbolic) or +K (spherical)."""

    kind: Kind
    dim: int
    curvature: float = 1.0
    _metric: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dim}")
        if not (self.curvature > 0 and math.isfinite(self.curvature)):
            raise ValueError(f"curvature magnitude must be positive, got {self.curvature}")
        object.__setattr__(self, "dim", int(self.dim))
        metric = np.ones(self.dim + 1)
        if self.kind is Kind.HYPERBOLIC:
            metric[0] = -1.0
        metric.setflags(write=False)
        object.__setattr__(self, "_metric", metric)

    @property
    def hyperbolic(self) -> bool:
        return self.kind is Kind.HYPERBOLIC

    @property
    def scale(self) -> float:
        """sqrt(K): converts physical lengths to unit-curvature lengths."""
        return math.sqrt(self.curvature)

    @property
    def metric(self) -> np.ndarray:
        """Diagonal of the ambient bilinear form (Lorentz or Euclidean)."""
        return self._metric

    def origin(self) -> np.ndarray:
        x = np.zeros(self.dim + 1)
        x[0] = 1.0
        return x

    # -- ambient algebra -------------------------------------------------

    def inner(self, u, v):
        """Model inner product along the last axis (Lorentz for hyperbolic)."""
        return np.sum(u * v * self._metric, axis=-1)

    def norm(self, v):
        """Physical norm of a tangent vector (model norm of the ambient vector)."""
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    def base_coefficient(self, p, x):
        """Coefficient of ``x`` in ``p`` w.r.t. the normal direction: -<p,x>_L or <p,x>."""
        ip = self.inner(p, x)
        return -ip if self.hyperbolic else ip

    def project_point(self, x):
        """Renormalize onto the model surface (and the upper sheet)."""
        x = np.asarray(x, dtype=float)
        q = np.abs(self.inner(x, x))
        x = x / np.sqrt(q)[..., None]
        if self.hyperbolic:
            x = np.where(x[..., :1] < 0, -x, x)
        return x

    def project_tangent(self, x, v):
        """Remove the normal component of ``v`` at ``x``."""
        c = self.inner(x, v)
        if self.hyperbolic:
            return v + c[..., None] * x
        return v - c[..., None] * x

    def point_residual(self, x):
        return np.abs(self.inner(x, x) + (1.0 if self.hyperbolic else -1.0))

    def check_point(self, x, tol=MODEL_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim + 1:
            raise GeometryError(f"expected ambient length {self.dim + 1}, got {x.shape[-1]}")
        if np.any(self.point_residual(x) > tol * np.maximum(1.0, np.sum(x * x, axis=-1))):
            raise GeometryError("point is off the model surface")
        if self.hyperbolic and np.any(x[..., 0] <= 0):
            raise GeometryError("point is on the lower sheet of the hyperboloid")
        return x

    def check_tangent(self, x, v, tol=MODEL_TOL):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        scale = np.sqrt(np.sum(x * x, axis=-1) * np.sum(v * v, axis=-1))
        if np.any(np.abs(self.inner(x, v)) > tol * np.maximum(1.0, scale)):
            raise GeometryError("vector is not tangent at the base point")
        return v

    # -- geometry ----------------------------------------------------------

    def _angle(self, x, y):
        """Unit-curvature distance plus the tangent residual u = y - a*x and its norm."""
        a = self.base_coefficient(y, x)
        u = y - a[..., None] * x
        s = self.norm(u)
        if self.hyperbolic:
            if np.any(a < 1.0 - MODEL_TOL):
                raise GeometryError("arccosh argument below 1: invalid hyperboloid points")
            # arccosh is ill-conditioned near 1, asinh of the tangent residual is not
            theta = np.where(a > 2.0, np.arccosh(np.maximum(a, 1.0)), np.arcsinh(s))
        else:
            if np.any(np.abs(a) > 1.0 + MODEL_TOL):
                raise GeometryError("arccos argument outside [-1, 1]: invalid sphere points")
            theta = np.arctan2(s, a)
        same = np.all(x == y, axis=-1)
        if np.any(same):
            theta = np.where(same, 0.0, theta)
            s = np.where(same, 0.0, s)
            u = np.where(same[..., None], 0.0, u)
        return theta, u, s

    def dist(self, x, y):
        theta, _, _ = self._angle(np.asarray(x, float), np.asarray(y, float))
        return theta / self.scale

    def exp(self, x, v):
        """Exponential map; ``v`` is a tangent vector at ``x`` with physical norm."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        n = self.norm(v)
        t = n * self.scale
        small = t < SERIES_CUTOFF
        safe_t = np.where(small, 1.0, t)
        if self.hyperbolic:
            c = np.cosh(t)
            sinc = np.where(small, 1.0 + t * t / 6.0, np.sinh(safe_t) / safe_t)
        else:
            c = np.cos(t)
            sinc = np.where(small, 1.0 - t * t / 6.0, np.sin(safe_t) / safe_t)
        y = c[..., None] * x + (sinc * self.scale)[..., None] * v
        y = self.project_point(y)
        return np.where((n == 0)[..., None], x, y)

    def log(self, x, y):
        """Logarithm map: tangent vector at ``x`` of physical norm dist(x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta, u, s = self._angle(x, y)
        if not self.hyperbolic and np.any(theta > math.pi - ANTIPODAL_GAP):
            raise GeometryError("near-antipodal points: logarithm is not unique")
        small = theta < SERIES_CUTOFF
        safe_s = np.where(s > 0, s, 1.0)
        if self.hyperbolic:
            ratio = np.where(small, 1.0 - theta * theta / 6.0, theta / safe_s)
        else:
            ratio = np.where(small, 1.0 + theta * theta / 6.0, theta / safe_s)
        v = (ratio / self.scale)[..., None] * u
        v = np.where((s == 0)[..., None], 0.0, v)
        return self.project_tangent(x, v)

    def orthonormal_frame(self, x) -> TangentFrame:
        """Deterministic orthonormal tangent frame at a single point ``x``.

        Gram-Schmidt on the projected ambient standard basis, taking at each
        step the remaining candidate of largest norm (lowest index on ties).
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise GeometryError("orthonormal_frame takes a single point")
        cand = self.project_tangent(x, np.eye(self.dim + 1))
        frame = []
        for _ in range(self.dim):
            for e in frame:
                cand = cand - self.inner(cand, e)[:, None] * e
            norms = self.norm(cand)
            k = int(np.argmax(norms))
            e = cand[k] / norms[k]
            # second pass keeps the residual at rounding level far from the origin
            for f in frame:
                e = e - self.inner(e, f) * f
            e = e / self.norm(e)
            frame.append(e)
            cand = np.delete(cand, k, axis=0)
        vectors = np.array(frame)
        vectors.setflags(write=False)
        return TangentFrame(base=x.copy(), vectors=vectors)

    def point_from_tangent_coords(self, x_ref, frame: TangentFrame, c):
        """exp_{x_ref}(sum_i c_i E_i); ``c`` holds physical lengths."""
        c = np.asarray(c, dtype=float)
        if not self.hyperbolic and np.any(np.linalg.norm(c, axis=-1) * self.scale >= math.pi):
            raise GeometryError("tangent coordinates beyond the sphere's injectivity radius")
        return self.exp(x_ref, c @ frame.vectors)

    def tangent_coords(self, x_ref, frame: TangentFrame, p):
        """Inverse of :meth:`point_from_tangent_coords`."""
        v = self.log(x_ref, p)
        return self.inner(v[..., None, :], frame.vectors)

    def geodesic(self, x, y, t):
        """Point at fraction ``t`` of the minimizing geodesic from x to y."""
        v = self.log(x, y)
        t = np.asarray(t, dtype=float)
        return self.exp(x, t[..., None] * v)

    def random_point(self, rng, center=None, max_dist=1.0):
        """Point at distance <= max_dist from ``center``, uniform direction."""
        center = self.origin() if center is None else center
        frame = self.orthonormal_frame(center)
        w = rng.standard_normal(self.dim)
        w *= rng.uniform(0, max_dist) / np.linalg.norm(w)
        return self.point_from_tangent_coords(center, frame, w)

    def random_tangent(self, rng, x, max_norm=1.0):
        frame = self.orthonormal_frame(x)
        w = rng.standard_normal(self.dim)
        w *= rng.uniform(0, max_norm) / np.linalg.norm(w)
        return w @ frame.vectors


def hyperbolic(dim, curvature=1.0) -> ManifoldSpec:
    return ManifoldSpec(Kind.HYPERBOLIC, dim, curvature)


def spherical(dim, curvature=1.0) -> ManifoldSpec:
    return ManifoldSpec(Kind.SPHERICAL, dim, curvature)
