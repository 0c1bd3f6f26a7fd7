import math

import numpy as np
import pytest

from geoellipsoid.manifold import ManifoldSpec, hyperbolic, spherical
from geoellipsoid.problems import DistanceTo, GeometricMedian, MaxDistance, ProblemInstance
from geoellipsoid.reference import reference_optimum
from geoellipsoid.solver import (SolverConfig, Trace, solve, solve_subproblem, stage_count,
                                 subproblem_budget, zeta)


def random_instance(spec, kind, n, radius, rng):
    x_ref = spec.origin()
    pts = np.array([spec.random_point(rng, x_ref, radius) for _ in range(n)])
    obj = GeometricMedian(pts, np.ones(n)) if kind == "median" else MaxDistance(pts)
    return ProblemInstance(spec, x_ref, radius, obj)


class TestFormulas:
    def test_zeta_values(self):
        assert zeta(1.0, 1.0) == pytest.approx(1.3130352854993312, abs=1e-12)
        # 3 cosh 3 / sinh 3 = 3.014909...
        assert zeta(3.0, 1.0) == pytest.approx(3 * math.cosh(3) / math.sinh(3), abs=1e-12)
        assert zeta(3.0, 1.0) == pytest.approx(3.01487, abs=1e-4)
        assert zeta(0.5, 4.0) == pytest.approx(zeta(1.0, 1.0))

    def test_zeta_small_limit(self):
        assert zeta(1e-9, 1.0) == 1.0
        assert zeta(1e-4 * 0.99, 1.0) == pytest.approx(zeta(1.01e-4, 1.0), abs=1e-8)
        assert zeta(0.3, 1.0) > 1.0

    def test_zeta_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            zeta(0.0, 1.0)

    def test_stage_count_example(self):
        assert stage_count(3.0, 1.0, 0.5) == 9

    def test_config_validation(self):
        for bad in (dict(epsilon=0.0), dict(epsilon=1.0), dict(epsilon=0.1, subproblem_safety=0.5),
                    dict(epsilon=0.1, max_total_queries=0)):
            with pytest.raises(ValueError):
                SolverConfig(**bad)

    def test_budget_grows_with_accuracy(self):
        spec = hyperbolic(3)
        inst = ProblemInstance(spec, spec.origin(), 1.0, DistanceTo(spec.origin()))
        assert subproblem_budget(inst, 1.0, 1e-8, 1.0) > subproblem_budget(inst, 1.0, 1e-2, 1.0)
        assert subproblem_budget(inst, 1.0, 1e-4, 2.0) >= 2 * subproblem_budget(inst, 1.0, 1e-4, 1.0) - 1


class TestSubproblem:
    @pytest.mark.parametrize("dim", [2, 3, 5])
    @pytest.mark.parametrize("manifold", ["hyperbolic", "spherical"])
    def test_distance_to(self, dim, manifold, rng):
        spec = ManifoldSpec(manifold, dim)
        x_k = spec.origin()
        p = spec.random_point(rng, x_k, 0.5)
        inst = ProblemInstance(spec, x_k, 1.0 if spec.hyperbolic else 1.2, DistanceTo(p))
        eps_sub = 1e-6
        st = solve_subproblem(inst, x_k, 1.0, eps_sub)
        assert float(spec.dist(st.x, p)) <= eps_sub
        assert st.queries <= st.budget

    def test_first_query_is_center(self, rng):
        spec = hyperbolic(3)
        inst = random_instance(spec, "median", 4, 3.0, rng)
        x_k = spec.random_point(rng, inst.x_ref, 1.0)
        trace = Trace()
        solve_subproblem(inst, x_k, 1.0, 1e-3, trace=trace)
        assert trace.rows[0][3] is True
        assert trace.rows[0][4] == pytest.approx(inst.value(x_k), abs=1e-15)

    @pytest.mark.parametrize("manifold", ["hyperbolic", "spherical"])
    def test_two_point_median(self, manifold, rng):
        spec = ManifoldSpec(manifold, 3)
        x_k = spec.origin()
        a = spec.random_point(rng, x_k, 0.5)
        b = spec.random_point(rng, x_k, 0.5)
        inst = ProblemInstance(spec, x_k, 1.2, GeometricMedian(np.array([a, b]), np.ones(2)))
        f_star = reference_optimum(inst).f_star
        eps_sub = 1e-5
        st = solve_subproblem(inst, x_k, 1.0, eps_sub)
        assert st.value - f_star <= eps_sub


class TestSolve:
    def test_single_stage_when_radius_small(self, rng):
        inst = random_instance(hyperbolic(3), "median", 4, 0.8, rng)
        res = solve(inst, SolverConfig(epsilon=1e-3))
        assert res.stages == 1 and res.planned_stages == 1

    def test_stage_plan_large_radius(self, rng):
        inst = random_instance(hyperbolic(2), "maxdist", 3, 3.0, rng)
        res = solve(inst, SolverConfig(epsilon=0.5))
        assert res.planned_stages == 9 and res.stages == 9

    def test_end_to_end_median(self, rng):
        inst = random_instance(hyperbolic(3), "median", 5, 3.0, rng)
        eps = 1e-5
        res = solve(inst, SolverConfig(epsilon=eps))
        f_star = reference_optimum(inst, cross_check=False).f_star
        assert res.complete
        assert res.f_best - f_star <= eps * inst.lipschitz * inst.radius
        assert res.f_best - f_star >= -1e-9

    def test_curvature_scaling(self, rng):
        # same unit-curvature geometry at K = 4 has all lengths halved
        base = random_instance(hyperbolic(3), "median", 4, 2.0, np.random.default_rng(5))
        spec4 = hyperbolic(3, 4.0)
        scaled = ProblemInstance(spec4, base.x_ref, 1.0, GeometricMedian(base.anchors, base.weights))
        a = solve(base, SolverConfig(epsilon=1e-4))
        b = solve(scaled, SolverConfig(epsilon=1e-4))
        assert b.f_best == pytest.approx(a.f_best / 2, abs=1e-6)

    def test_budget_exhaustion(self, rng):
        inst = random_instance(hyperbolic(3), "median", 5, 3.0, rng)
        res = solve(inst, SolverConfig(epsilon=1e-4, max_total_queries=10))
        assert not res.complete
        assert res.queries_used == 10
        assert res.x_best is not None


@pytest.fixture(scope="module")
def multi_stage():
    rng = np.random.default_rng(99)
    inst = random_instance(hyperbolic(3), "median", 5, 2.5, rng)
    return inst, solve(inst, SolverConfig(epsilon=1e-3))


class TestInvariants:
    def test_f_best_consistent(self, multi_stage):
        inst, res = multi_stage
        assert abs(inst.value(res.x_best) - res.f_best) <= 1e-12
        assert inst.contains(res.x_best, tol=1e-9)
        assert res.f_best <= inst.value(inst.x_ref)

    def test_trace_monotone(self, multi_stage):
        _, res = multi_stage
        rows = res.trace.rows
        assert [r[0] for r in rows] == list(range(len(rows)))
        best = [r[5] for r in rows if r[5] is not None]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert len(rows) == res.queries_used

    def test_stage_progress(self, multi_stage):
        inst, res = multi_stage
        eps_sub = 1e-3 / 4 * inst.lipschitz * 1.0
        prev = inst.value(inst.x_ref)
        for st in res.stage_results:
            assert st.value <= prev + eps_sub
            prev = st.value

    def test_feasible_queries_in_both_balls(self, rng):
        inst = random_instance(hyperbolic(3), "maxdist", 4, 2.0, rng)
        spec = inst.spec
        x_k = spec.random_point(rng, inst.x_ref, 1.5)
        seen = []
        original = inst.evaluate

        class Spy:
            def __getattr__(self, name):
                return getattr(inst, name)

            def evaluate(self, x):
                seen.append(x.copy())
                return original(x)

        solve_subproblem(Spy(), x_k, 1.0, 1e-4)
        assert seen
        pts = np.array(seen)
        assert spec.dist(inst.x_ref, pts).max() <= inst.radius + 1e-9
        assert spec.dist(x_k, pts).max() <= 1.0 + 1e-9

    def test_deterministic(self, multi_stage):
        inst, res = multi_stage
        again = solve(inst, SolverConfig(epsilon=1e-3))
        assert again.trace.rows == res.trace.rows
        np.testing.assert_array_equal(again.x_best, res.x_best)

    @pytest.mark.parametrize("d", [3, 5])
    def test_query_growth_in_dimension(self, d):
        def queries(dim):
            inst = random_instance(hyperbolic(dim), "median", 6, 1.5, np.random.default_rng(dim))
            return solve(inst, SolverConfig(epsilon=1e-3, subproblem_safety=1.0)).queries_used
        assert queries(2 * d) / queries(d) <= 5

    def test_query_growth_in_accuracy(self):
        inst = random_instance(hyperbolic(3), "median", 6, 1.5, np.random.default_rng(3))
        q = {e: solve(inst, SolverConfig(epsilon=e, subproblem_safety=1.0)).queries_used
             for e in (1e-2, 1e-4)}
        # log(1/eps) doubles: at most quadratic growth, with slack
        assert q[1e-4] / q[1e-2] <= 5


@pytest.mark.parametrize("radius,stages", [(0.9, 1), (1.2, stage_count(1.2, 1.0, 1e-6))])
def test_spherical(radius, stages, rng):
    inst = random_instance(spherical(3), "median", 4, radius, rng)
    res = solve(inst, SolverConfig(epsilon=1e-6))
    f_star = reference_optimum(inst, cross_check=False).f_star
    assert res.stages == stages
    assert res.f_best - f_star <= 1e-6 * inst.lipschitz * inst.radius
