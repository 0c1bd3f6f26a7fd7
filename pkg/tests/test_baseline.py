
import numpy as np
import pytest

from geoellipsoid.baseline import BaselineConfig, project_ball, run_baseline
from geoellipsoid.manifold import ManifoldSpec, hyperbolic
from geoellipsoid.problems import DistanceTo, GeometricMedian, MaxDistance, ProblemInstance
from geoellipsoid.reference import reference_optimum


def test_already_optimal_start(spec2):
    inst = ProblemInstance(spec2, spec2.origin(), 1.0, DistanceTo(spec2.origin()))
    res = run_baseline(inst, BaselineConfig(max_queries=50))
    assert res.trace.rows[0][5] == 0.0
    assert res.f_best == 0.0


def test_two_point_median(spec2, rng):
    a = spec2.random_point(rng, max_dist=1.0)
    b = spec2.random_point(rng, max_dist=1.0)
    inst = ProblemInstance(spec2, spec2.origin(), 1.0, GeometricMedian(np.array([a, b]), np.ones(2)))
    res = run_baseline(inst, BaselineConfig(max_queries=10_000))
    f_star = reference_optimum(inst).f_star
    assert res.f_best - f_star <= 0.1 * inst.lipschitz * inst.radius


def test_project_interior_is_identity(spec2, rng):
    inst = ProblemInstance(spec2, spec2.origin(), 1.0, DistanceTo(spec2.origin()))
    x = spec2.random_point(rng, max_dist=0.9)
    assert project_ball(inst, x) is x


def test_project_exterior_lands_on_boundary(spec2):
    inst = ProblemInstance(spec2, spec2.origin(), 1.0, DistanceTo(spec2.origin()))
    x = inst.point([1.4, 0.3])
    y = project_ball(inst, x)
    assert float(spec2.dist(inst.x_ref, y)) == pytest.approx(1.0, abs=1e-12)
    # same direction from x_ref
    u, v = inst.coords(x), inst.coords(y)
    assert abs(u[0] * v[1] - u[1] * v[0]) < 1e-12


@pytest.mark.parametrize("kind", ["median", "maxdist"])
def test_iterates_feasible(kind, rng):
    spec = hyperbolic(3)
    pts = np.array([spec.random_point(rng, max_dist=2.0) for _ in range(5)])
    obj = GeometricMedian(pts, np.ones(5)) if kind == "median" else MaxDistance(pts)
    inst = ProblemInstance(spec, spec.origin(), 2.0, obj)
    seen = []
    original = inst.evaluate

    class Spy:
        def __getattr__(self, name):
            return getattr(inst, name)

        def evaluate(self, x):
            seen.append(x)
            return original(x)

    run_baseline(Spy(), BaselineConfig(max_queries=500))
    assert spec.dist(inst.x_ref, np.array(seen)).max() <= inst.radius + 1e-9


def test_constant_step(rng):
    spec = hyperbolic(2)
    inst = ProblemInstance(spec, spec.origin(), 1.0, DistanceTo(spec.random_point(rng, max_dist=0.8)))
    res = run_baseline(inst, BaselineConfig(max_queries=200, step=0.01))
    assert res.f_best <= 0.01
    assert res.queries_used == 200


def test_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(max_queries=0)
    with pytest.raises(ValueError):
        BaselineConfig(max_queries=10, step=-1.0)


def test_deterministic(rng):
    spec = hyperbolic(3)
    pts = np.array([spec.random_point(rng, max_dist=1.0) for _ in range(4)])
    inst = ProblemInstance(spec, spec.origin(), 1.0, GeometricMedian(pts, np.ones(4)))
    a = run_baseline(inst, BaselineConfig(max_queries=300))
    b = run_baseline(inst, BaselineConfig(max_queries=300))
    assert a.trace.rows == b.trace.rows


@pytest.mark.parametrize("manifold", ["hyperbolic", "spherical"])
def test_sublinear_envelope(manifold, rng):
    spec = ManifoldSpec(manifold, 3)
    c0 = 0.0
    for _ in range(4):
        pts = np.array([spec.random_point(rng, max_dist=1.0) for _ in range(5)])
        inst = ProblemInstance(spec, spec.origin(), 1.0, GeometricMedian(pts, np.ones(5)))
        f_star = reference_optimum(inst, cross_check=False).f_star
        res = run_baseline(inst, BaselineConfig(max_queries=2000))
        best = np.array([r[5] for r in res.trace.rows])
        t = np.arange(1, len(best) + 1)
        scale = inst.lipschitz * inst.radius / np.sqrt(t)
        c0 = max(c0, float(np.max((best - f_star) / scale)))
    assert c0 <= 10
