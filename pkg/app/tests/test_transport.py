"""
Unit tests for the transport module.
"""
import math
import unittest

import numpy as np

from app.core.exceptions import TransportError
from app.core.measures import AtomicMeasure, dirac
from app.core.spaces import (
    POLE_ZERO,
    Euclidean,
    FiniteSpace,
    Index,
    Interval,
    Pair,
    QProduct,
    Ray,
    Scalar,
    SuspPoint,
    Suspension,
    Vector,
)
from app.core.transport import (
    TransportPlan,
    adjacency_test,
    cost_matrix,
    distance_to_fiber,
    is_cyclically_monotone,
    monotone_plan,
    plan_from_dict,
    solve_wp,
    wp_1d,
)

RAY = Ray()


def ray_measure(values, weights):
    return AtomicMeasure(RAY, tuple(Scalar(v) for v in values), tuple(weights))


def random_ray_measure(rng, max_atoms=8):
    size = int(rng.integers(1, max_atoms + 1))
    return ray_measure(rng.uniform(0.0, 10.0, size), rng.dirichlet(np.ones(size)))


class TestSolveWp(unittest.TestCase):
    """Test case for the exact Wasserstein solver."""

    def test_dirac_pair_is_exact_distance(self):
        wp, plan = solve_wp(RAY, dirac(RAY, Scalar(1.0)), dirac(RAY, Scalar(3.5)), 3.0)
        self.assertEqual(wp, 2.5)
        self.assertEqual(plan.entries[0].mass, 1.0)

    def test_dirac_against_measure_uses_product_coupling(self):
        wp, plan = solve_wp(RAY, dirac(RAY, Scalar(0.0)), ray_measure([1.0, 3.0], [0.5, 0.5]), 2.0)
        self.assertAlmostEqual(wp, math.sqrt(5.0))
        self.assertEqual(len(plan.entries), 2)

    def test_matches_quantile_formula(self):
        rng = np.random.default_rng(11)
        for p in (1.0, 2.0, 3.0):
            for _ in range(20):
                mu, nu = random_ray_measure(rng), random_ray_measure(rng)
                wp, plan = solve_wp(RAY, mu, nu, p)
                self.assertAlmostEqual(wp, wp_1d(mu, nu, p), delta=1e-9 * max(1.0, wp))
                self.assertLessEqual(plan.marginal_defect(), 1e-10)

    def test_finite_cycle(self):
        space = FiniteSpace.cycle(4)
        mu = AtomicMeasure(space, (Index(0), Index(1)), (0.5, 0.5))
        nu = AtomicMeasure(space, (Index(2), Index(3)), (0.5, 0.5))
        wp, _ = solve_wp(space, mu, nu, 1.0)
        self.assertAlmostEqual(wp, 1.0)

    def test_euclidean_translation(self):
        space = Euclidean(2)
        mu = AtomicMeasure(space, (Vector((0, 0)), Vector((1, 2))), (0.3, 0.7))
        nu = AtomicMeasure(space, (Vector((3, 4)), Vector((4, 6))), (0.3, 0.7))
        wp, _ = solve_wp(space, mu, nu, 2.0)
        self.assertAlmostEqual(wp, 5.0)

    def test_invalid_inputs(self):
        mu = dirac(RAY, Scalar(1.0))
        with self.assertRaises(TransportError):
            solve_wp(RAY, mu, mu, 0.5)
        with self.assertRaises(TransportError):
            solve_wp(Euclidean(1), mu, mu, 2.0)

    def test_cost_matrix(self):
        mu = ray_measure([0.0, 1.0], [0.5, 0.5])
        nu = ray_measure([2.0], [1.0])
        np.testing.assert_allclose(cost_matrix(RAY, mu, nu, 2.0), [[4.0], [1.0]])


class TestTransportPlan(unittest.TestCase):
    """Test case for explicit plans."""

    def test_from_entries_checks_marginals(self):
        mu = ray_measure([0.0, 1.0], [0.5, 0.5])
        with self.assertRaises(TransportError):
            TransportPlan.from_entries(mu, mu, [(0, 0, 0.5), (1, 0, 0.5)], 2.0)
        with self.assertRaises(TransportError):
            TransportPlan.from_entries(mu, mu, [(0, 0, 0.5), (1, 5, 0.5)], 2.0)

    def test_cost_is_recomputed(self):
        mu = ray_measure([0.0, 1.0], [0.5, 0.5])
        plan = TransportPlan.from_entries(mu, mu, [(0, 1, 0.5), (1, 0, 0.5)], 2.0)
        self.assertAlmostEqual(plan.cost, 1.0)
        self.assertAlmostEqual(plan.wp, 1.0)

    def test_dict_round_trip(self):
        mu = ray_measure([0.0, 2.0], [0.5, 0.5])
        nu = ray_measure([1.0, 4.0], [0.25, 0.75])
        _, plan = solve_wp(RAY, mu, nu, 2.0)
        restored = plan_from_dict(plan.to_dict())
        self.assertAlmostEqual(restored.cost, plan.cost, places=12)
        np.testing.assert_allclose(restored.matrix(), plan.matrix())

    def test_malformed_dict(self):
        with self.assertRaises(TransportError):
            plan_from_dict({"p": 2.0})


class TestOneDimensional(unittest.TestCase):
    """Test case for quantile distances and comonotone plans."""

    def setUp(self):
        self.mu = ray_measure([0.0, 2.0], [0.5, 0.5])
        self.nu = ray_measure([1.0, 3.0], [0.25, 0.75])

    def test_wp_1d(self):
        self.assertAlmostEqual(wp_1d(self.mu, self.nu, 1.0), 1.5)

    def test_monotone_plan_is_optimal(self):
        plan = monotone_plan(self.mu, self.nu, 1.0)
        self.assertAlmostEqual(plan.cost, 1.5)
        self.assertEqual(len(plan.entries), 3)
        for p in (2.0, 3.0):
            wp, _ = solve_wp(RAY, self.mu, self.nu, p)
            self.assertAlmostEqual(monotone_plan(self.mu, self.nu, p).wp, wp, places=10)

    def test_rejects_other_spaces(self):
        delta = dirac(Euclidean(1), Vector((0.0,)))
        with self.assertRaises(TransportError):
            wp_1d(delta, delta)
        with self.assertRaises(TransportError):
            monotone_plan(self.mu, dirac(Interval(0.0, 5.0), Scalar(1.0)))

    def test_adjacency(self):
        origin = dirac(RAY, Scalar(0.0))
        self.assertTrue(adjacency_test(origin, self.mu))
        self.assertFalse(adjacency_test(dirac(RAY, Scalar(1.0)), self.mu))
        self.assertTrue(adjacency_test(self.mu, ray_measure([0.0, 4.0], [0.5, 0.5])))
        self.assertTrue(adjacency_test(self.mu, self.mu))
        first = ray_measure([0.0, 1.0, 2.0], [1 / 3, 1 / 3, 1 / 3])
        second = ray_measure([1.0, 2.0], [1 / 3, 2 / 3])
        self.assertFalse(adjacency_test(first, second))


class TestCyclicalMonotonicity(unittest.TestCase):
    """Test case for the cyclical monotonicity check."""

    def test_crossed_plan_fails(self):
        mu = ray_measure([0.0, 1.0], [0.5, 0.5])
        plan = TransportPlan.from_entries(mu, mu, [(0, 1, 0.5), (1, 0, 0.5)], 2.0)
        report = is_cyclically_monotone(plan)
        self.assertFalse(report)
        self.assertEqual(sorted(report.cycle), [0, 1])
        self.assertAlmostEqual(report.gain, -2.0)

    def test_optimal_plans_pass(self):
        rng = np.random.default_rng(3)
        space = QProduct(Euclidean(2), FiniteSpace.cycle(3), 2.0)
        for _ in range(10):
            size = 5
            points = lambda: tuple(  # noqa: E731
                Pair(Vector(rng.normal(size=2)), Index(int(rng.integers(3)))) for _ in range(size)
            )
            mu = AtomicMeasure(space, points(), tuple(rng.dirichlet(np.ones(size))))
            nu = AtomicMeasure(space, points(), tuple(rng.dirichlet(np.ones(size))))
            _, plan = solve_wp(space, mu, nu, 2.0)
            self.assertTrue(is_cyclically_monotone(plan, max_cycle=4))

    def test_cycle_limit(self):
        mu = ray_measure([0.0, 1.0], [0.5, 0.5])
        _, plan = solve_wp(RAY, mu, mu, 2.0)
        with self.assertRaises(TransportError):
            is_cyclically_monotone(plan, max_cycle=50)


class TestDistanceToFiber(unittest.TestCase):
    """Test case for the distance to a fiber level."""

    def test_vertical_move_on_cylinder(self):
        cylinder = QProduct(Interval(0.0, 1.0), RAY, 2.0)
        mu = AtomicMeasure(
            cylinder, (Pair(Scalar(0.0), Scalar(1.0)), Pair(Scalar(1.0), Scalar(3.0))), (0.5, 0.5)
        )
        wp, projected = distance_to_fiber(cylinder, mu, 2.0, 2.0)
        self.assertAlmostEqual(wp, 1.0)
        self.assertTrue(all(point.right == Scalar(2.0) for point in projected.points))

    def test_equator_is_nearest_fiber_measure_on_suspension(self):
        space = Suspension(FiniteSpace.from_coordinates([0.0, 0.4]))
        quarter, half = math.pi / 4, math.pi / 2
        mu = AtomicMeasure(space, (SuspPoint(Index(0), quarter), SuspPoint(Index(1), quarter)), (0.5, 0.5))
        wp, projected = distance_to_fiber(space, mu, half, 2.0)
        self.assertAlmostEqual(wp, quarter)
        expected = AtomicMeasure(space, (SuspPoint(Index(0), half), SuspPoint(Index(1), half)), (0.5, 0.5))
        self.assertTrue(projected.approx_equal(expected))
        rng = np.random.default_rng(11)
        fiber = (SuspPoint(Index(0), half), SuspPoint(Index(1), half))
        for weights in rng.dirichlet([1.0, 1.0], size=50):
            other, _ = solve_wp(space, mu, AtomicMeasure(space, fiber, tuple(weights)), 2.0)
            self.assertGreaterEqual(other, wp - 1e-9)

    def test_pole_mass_uses_extension(self):
        space = Suspension(FiniteSpace.from_coordinates([0.0, 0.4]))
        third = math.pi / 3
        wp, projected = distance_to_fiber(space, dirac(space, POLE_ZERO), third, 2.0, Index(1))
        self.assertAlmostEqual(wp, third)
        self.assertEqual(projected.points, (SuspPoint(Index(1), third),))
        _, default = distance_to_fiber(space, dirac(space, POLE_ZERO), third, 2.0)
        self.assertEqual(default.points, (SuspPoint(Index(0), third),))


if __name__ == "__main__":
    unittest.main()
