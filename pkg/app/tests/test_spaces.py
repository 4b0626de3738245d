"""
Unit tests for the spaces module.
"""
import math
import unittest

from hypothesis import HealthCheck, given, settings as hypothesis_settings, strategies as st

from app.core.exceptions import NotComputableError, SpaceError
from app.core.spaces import (
    LINE,
    POLE_PI,
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
    condition_a_check,
    condition_b_check,
    cylinder_scaling_map,
    distance,
    fiber_projection,
    full_meridian_projection,
    geodesic,
    intermediate_points,
    meridian_projection,
    point_from_json,
    point_to_json,
    scaling_map,
    space_from_dict,
    space_to_dict,
)

angles = st.floats(min_value=0.0, max_value=math.pi, allow_nan=False, allow_infinity=False)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


class TestBasicSpaces(unittest.TestCase):
    """Test case for the ray, intervals and Euclidean spaces."""

    def test_ray_distance(self):
        self.assertEqual(distance(Ray(), Scalar(1.5), Scalar(4.0)), 2.5)

    def test_ray_rejects_negative_points(self):
        with self.assertRaises(SpaceError):
            distance(Ray(), Scalar(-1.0), Scalar(1.0))

    def test_interval_bounds(self):
        interval = Interval(0.0, 1.0)
        self.assertTrue(interval.contains(Scalar(1.0)))
        self.assertFalse(interval.contains(Scalar(1.5)))
        self.assertEqual(interval.diameter, 1.0)
        with self.assertRaises(SpaceError):
            Interval(1.0, 1.0)

    def test_line_reference_point(self):
        self.assertEqual(LINE.reference_point(), Scalar(0.0))
        self.assertEqual(LINE.diameter, math.inf)

    def test_euclidean_distance(self):
        space = Euclidean(2)
        self.assertAlmostEqual(distance(space, Vector((0, 0)), Vector((3, 4))), 5.0)
        with self.assertRaises(SpaceError):
            distance(space, Vector((0, 0, 0)), Vector((3, 4)))

    def test_pairwise_matches_distance(self):
        space = Euclidean(3)
        xs = [Vector((0, 1, 2)), Vector((-1, 0.5, 3))]
        ys = [Vector((2, 2, 2)), Vector((0, 0, 0)), Vector((1, -1, 1))]
        matrix = space.pairwise(xs, ys)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                self.assertAlmostEqual(matrix[i, j], space.distance(x, y), places=12)


class TestFiniteSpace(unittest.TestCase):
    """Test case for finite metric spaces."""

    def test_cycle_metric(self):
        space = FiniteSpace.cycle(4)
        self.assertEqual(space.dist[0], (0.0, 1.0, 2.0, 1.0))
        self.assertEqual(space.diameter, 2.0)

    def test_rejects_invalid_matrices(self):
        with self.assertRaises(SpaceError):
            FiniteSpace(((0, 1), (2, 0)))
        with self.assertRaises(SpaceError):
            FiniteSpace(((0, 0), (0, 0)))
        with self.assertRaises(SpaceError):
            FiniteSpace(((0, 1, 5), (1, 0, 1), (5, 1, 0)))
        with self.assertRaises(SpaceError):
            FiniteSpace(((0, 1), (1, 0), (1, 1)))

    def test_from_coordinates(self):
        space = FiniteSpace.from_coordinates([0.0, 0.25, 1.0])
        self.assertEqual(space.size, 3)
        self.assertAlmostEqual(space.distance(Index(0), Index(2)), 1.0)

    def test_intermediate_points_scan(self):
        space = FiniteSpace.cycle(4)
        self.assertEqual(intermediate_points(space, Index(0), Index(2), 0.5), [Index(1), Index(3)])

    def test_geodesic_stops(self):
        space = FiniteSpace.from_coordinates([0.0, 1.0, 2.0])
        path = geodesic(space, Index(0), Index(2))
        self.assertEqual(path(0.5), Index(1))
        self.assertEqual(path(1.0), Index(2))
        with self.assertRaises(NotComputableError):
            path(0.25)


class TestQProduct(unittest.TestCase):
    """Test case for q-products."""

    def test_euclidean_product_is_hypot(self):
        space = QProduct(Ray(), Ray(), 2.0)
        self.assertAlmostEqual(
            space.distance(Pair(Scalar(0), Scalar(0)), Pair(Scalar(3), Scalar(4))), 5.0
        )

    def test_general_q(self):
        space = QProduct(Ray(), Ray(), 3.0)
        value = space.distance(Pair(Scalar(0), Scalar(0)), Pair(Scalar(1), Scalar(1)))
        self.assertAlmostEqual(value, 2.0 ** (1.0 / 3.0))

    def test_rejects_q_at_most_one(self):
        with self.assertRaises(SpaceError):
            QProduct(Ray(), Ray(), 1.0)

    def test_intermediate_points_are_factorwise(self):
        space = QProduct(Euclidean(2), Ray(), 2.0)
        a = Pair(Vector((0, 0)), Scalar(0))
        b = Pair(Vector((2, 0)), Scalar(2))
        self.assertEqual(
            intermediate_points(space, a, b, 0.5), [Pair(Vector((1, 0)), Scalar(1))]
        )

    def test_points_of_finite_factors(self):
        space = QProduct(FiniteSpace.cycle(3), FiniteSpace.from_coordinates([0, 1]))
        self.assertEqual(len(space.points()), 6)
        self.assertIsNone(QProduct(Ray(), FiniteSpace.cycle(3)).points())


class TestSuspension(unittest.TestCase):
    """Test case for spherical suspensions."""

    def setUp(self):
        self.space = Suspension(FiniteSpace.from_coordinates([0.0, 0.4]))

    def test_poles_drop_their_base(self):
        self.assertEqual(SuspPoint(Index(1), 0.0), POLE_ZERO)
        self.assertTrue(SuspPoint(Index(0), math.pi).is_pole)
        with self.assertRaises(SpaceError):
            SuspPoint(None, 1.0)
        with self.assertRaises(SpaceError):
            SuspPoint(Index(0), 4.0)

    def test_pole_distance_is_pi(self):
        self.assertEqual(self.space.distance(POLE_ZERO, POLE_PI), math.pi)

    def test_equator_distance_is_base_distance(self):
        a = SuspPoint(Index(0), math.pi / 2)
        b = SuspPoint(Index(1), math.pi / 2)
        self.assertAlmostEqual(self.space.distance(a, b), 0.4, places=12)

    def test_meridian_distance_is_angle_gap(self):
        a = SuspPoint(Index(0), 0.3)
        b = SuspPoint(Index(0), 1.1)
        self.assertAlmostEqual(self.space.distance(a, b), 0.8, places=12)
        self.assertAlmostEqual(self.space.distance(POLE_ZERO, b), 1.1, places=12)

    def test_pairwise_matches_distance(self):
        points = self.space.grid([0.0, 0.5, math.pi / 2, 2.0, math.pi])
        matrix = self.space.pairwise(points, points)
        for i, x in enumerate(points):
            for j, y in enumerate(points):
                self.assertAlmostEqual(matrix[i, j], self.space.distance(x, y), places=12)

    def test_grid_lists_poles_once(self):
        points = self.space.grid([0.0, math.pi / 2, math.pi])
        self.assertEqual(len(points), 4)

    def test_wide_base(self):
        with self.assertRaises(SpaceError):
            Suspension(Interval(0.0, 2.0), strict=True)
        self.assertTrue(Suspension(Interval(0.0, 2.0)).diameter_warning)
        self.assertFalse(self.space.diameter_warning)

    def test_pole_to_pole_intermediate_points(self):
        points = intermediate_points(self.space, POLE_ZERO, POLE_PI, 0.5)
        self.assertEqual(points, [SuspPoint(Index(0), math.pi / 2), SuspPoint(Index(1), math.pi / 2)])

    def test_geodesic_off_meridian_not_computable(self):
        a = SuspPoint(Index(0), 1.0)
        b = SuspPoint(Index(1), 2.0)
        with self.assertRaises(NotComputableError):
            geodesic(self.space, a, b)
        path = geodesic(self.space, POLE_ZERO, POLE_PI, pole_base=Index(1))
        self.assertEqual(path(0.5), SuspPoint(Index(1), math.pi / 2))

    def test_scaling_map(self):
        equator = SuspPoint(Index(1), math.pi / 2)
        self.assertAlmostEqual(scaling_map(self.space, 0.5, equator).angle, math.pi / 4)
        self.assertAlmostEqual(scaling_map(self.space, 1.5, equator).angle, 3 * math.pi / 4)
        self.assertEqual(scaling_map(self.space, 2.0, equator), POLE_PI)
        with self.assertRaises(SpaceError):
            scaling_map(self.space, 3.0, equator)

    def test_fiber_projection_sends_poles_to_extension(self):
        self.assertEqual(
            fiber_projection(self.space, 1.0, POLE_PI, extension=Index(1)), SuspPoint(Index(1), 1.0)
        )
        self.assertEqual(fiber_projection(self.space, 0.0, SuspPoint(Index(1), 1.0)), POLE_ZERO)

    def test_meridian_projection(self):
        point = SuspPoint(Index(1), math.pi / 4)
        projected = meridian_projection(self.space, Index(0), point)
        self.assertEqual(projected.base, Index(0))
        self.assertAlmostEqual(projected.angle, math.atan(math.cos(0.4)))
        self.assertEqual(
            meridian_projection(self.space, Index(0), SuspPoint(Index(1), math.pi / 2)),
            SuspPoint(Index(0), math.pi / 2),
        )
        with self.assertRaises(SpaceError):
            meridian_projection(self.space, Index(0), SuspPoint(Index(1), 2.0))

    def test_meridian_projection_is_closest(self):
        point = SuspPoint(Index(1), 0.9)
        projected = meridian_projection(self.space, Index(0), point)
        best = self.space.distance(point, projected)
        for k in range(1, 200):
            other = SuspPoint(Index(0), k * (math.pi / 2) / 200)
            self.assertGreaterEqual(self.space.distance(point, other), best - 1e-12)

    def test_full_meridian_projection_keeps_hemisphere(self):
        projected = full_meridian_projection(self.space, Index(0), SuspPoint(Index(1), 3 * math.pi / 4))
        self.assertGreater(projected.angle, math.pi / 2)
        self.assertEqual(full_meridian_projection(self.space, Index(0), POLE_PI), POLE_PI)


class TestCylinderMaps(unittest.TestCase):
    """Test case for half-cylinder maps."""

    def setUp(self):
        self.cylinder = QProduct(Interval(0.0, 1.0), Ray(), 2.0)

    def test_fiber_projection(self):
        point = Pair(Scalar(0.3), Scalar(5.0))
        self.assertEqual(fiber_projection(self.cylinder, 2.0, point), Pair(Scalar(0.3), Scalar(2.0)))
        with self.assertRaises(SpaceError):
            fiber_projection(self.cylinder, -1.0, point)

    def test_scaling(self):
        point = Pair(Scalar(0.3), Scalar(5.0))
        self.assertEqual(cylinder_scaling_map(self.cylinder, 0.5, point), Pair(Scalar(0.3), Scalar(2.5)))
        with self.assertRaises(SpaceError):
            cylinder_scaling_map(Euclidean(2), 0.5, Vector((0, 0)))


class TestLinearGeodesics(unittest.TestCase):
    """Test case for straight geodesics and their extensions."""

    def test_ray_midpoint(self):
        self.assertEqual(intermediate_points(Ray(), Scalar(1.0), Scalar(2.0), 0.5), [Scalar(1.5)])

    def test_intermediate_points_preconditions(self):
        with self.assertRaises(SpaceError):
            intermediate_points(Ray(), Scalar(1.0), Scalar(1.0), 0.5)
        with self.assertRaises(SpaceError):
            intermediate_points(Ray(), Scalar(1.0), Scalar(2.0), 0.0)

    def test_extension_stays_in_space(self):
        path = geodesic(Ray(), Scalar(1.0), Scalar(0.5))
        self.assertEqual(path(1.5), Scalar(0.25))
        with self.assertRaises(SpaceError):
            path(3.0)


class TestConditions(unittest.TestCase):
    """Test case for the finite-space rigidity conditions."""

    def test_condition_a_on_a_path(self):
        space = FiniteSpace.from_coordinates([0.0, 1.0, 2.0])
        self.assertEqual(condition_a_check(space, [Index(0)]), Index(1))
        self.assertEqual(condition_a_check(space, [Index(0), Index(2)]), Index(1))

    def test_condition_a_fails_on_a_triangle(self):
        self.assertIsNone(condition_a_check(FiniteSpace.cycle(3), [Index(0)]))

    def test_condition_b(self):
        space = FiniteSpace.from_coordinates([0.0, 0.3, 0.7])
        found = condition_b_check(space, [Index(1), Index(2)], [math.pi / 4, math.pi / 3])
        self.assertEqual(found, Index(0))

    def test_condition_b_rejects_equator_and_repeats(self):
        space = FiniteSpace.from_coordinates([0.0, 0.3, 0.7])
        with self.assertRaises(SpaceError):
            condition_b_check(space, [Index(1)], [math.pi / 2])
        with self.assertRaises(SpaceError):
            condition_b_check(space, [Index(1)], [0.5, 0.5])
        with self.assertRaises(SpaceError):
            condition_b_check(space, [Index(1), Index(1)], [0.5])


class TestSpaceJson(unittest.TestCase):
    """Test case for the JSON form of spaces and points."""

    def test_nested_space(self):
        space = Suspension(QProduct(FiniteSpace.cycle(3, 0.2), Interval(0.0, 0.5), 3.0))
        self.assertEqual(space_from_dict(space_to_dict(space)), space)

    def test_line_uses_null_bounds(self):
        self.assertEqual(space_to_dict(LINE), {"kind": "interval", "lower": None, "upper": None})
        self.assertEqual(space_from_dict({"kind": "interval"}), LINE)

    def test_flat_distance_matrix(self):
        space = space_from_dict({"kind": "finite", "n": 2, "dist": [0, 1, 1, 0]})
        self.assertEqual(space, FiniteSpace(((0, 1), (1, 0))))

    def test_unknown_and_incomplete(self):
        with self.assertRaises(SpaceError):
            space_from_dict({"kind": "torus"})
        with self.assertRaises(SpaceError):
            space_from_dict({"kind": "euclidean"})

    def test_points(self):
        space = Suspension(FiniteSpace.cycle(3, 0.2))
        self.assertEqual(point_to_json(space, POLE_PI), {"pole": "pi"})
        point = SuspPoint(Index(2), 1.0)
        self.assertEqual(point_from_json(space, point_to_json(space, point)), point)
        with self.assertRaises(SpaceError):
            point_from_json(space, {"base": 5, "angle": 1.0})
        with self.assertRaises(SpaceError):
            point_from_json(Ray(), True)


# Each example checks a batch of triples; 500 examples give 10^4 triples per space.
BATCH = 20
METRIC_SLACK = 1e-12
AXIOM_SETTINGS = hypothesis_settings(
    max_examples=500,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example, HealthCheck.data_too_large],
)

bounded = st.floats(min_value=0.0, max_value=10.0, allow_nan=False, allow_infinity=False)
signed = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
exponents = st.floats(min_value=1.1, max_value=6.0, allow_nan=False, allow_infinity=False)


def triples(points):
    return st.lists(st.tuples(points, points, points), min_size=BATCH, max_size=BATCH)


@st.composite
def finite_cases(draw):
    n = draw(st.integers(min_value=3, max_value=8))
    space = draw(st.sampled_from([FiniteSpace.cycle(n, 0.5), FiniteSpace.from_coordinates(range(n))]))
    return space, draw(triples(st.integers(min_value=0, max_value=n - 1).map(Index)))


@st.composite
def product_cases(draw):
    space = QProduct(Euclidean(2), Interval(0.0, 1.0), draw(exponents))
    vectors = st.tuples(signed, signed).map(Vector)
    return space, draw(triples(st.builds(Pair, vectors, unit.map(Scalar))))


class TestMetricAxioms(unittest.TestCase):
    """Property tests for zero diagonal, exact symmetry and the triangle inequality."""

    def check_axioms(self, space, cases):
        for a, b, c in cases:
            ab = space.distance(a, b)
            self.assertEqual(space.distance(a, a), 0.0)
            self.assertGreaterEqual(ab, 0.0)
            self.assertEqual(ab, space.distance(b, a))
            self.assertLessEqual(space.distance(a, c), ab + space.distance(b, c) + METRIC_SLACK)

    @AXIOM_SETTINGS
    @given(triples(bounded.map(Scalar)))
    def test_ray(self, cases):
        self.check_axioms(Ray(), cases)

    @AXIOM_SETTINGS
    @given(triples(unit.map(Scalar)))
    def test_interval(self, cases):
        self.check_axioms(Interval(0.0, 1.0), cases)

    @AXIOM_SETTINGS
    @given(triples(st.tuples(signed, signed, signed).map(Vector)))
    def test_euclidean(self, cases):
        self.check_axioms(Euclidean(3), cases)

    @AXIOM_SETTINGS
    @given(finite_cases())
    def test_finite(self, case):
        self.check_axioms(*case)

    @AXIOM_SETTINGS
    @given(triples(st.builds(Pair, unit.map(Scalar), bounded.map(Scalar))))
    def test_cylinder(self, cases):
        self.check_axioms(QProduct(Interval(0.0, 1.0), Ray(), 2.0), cases)

    @AXIOM_SETTINGS
    @given(triples(st.builds(SuspPoint, unit.map(Scalar), angles)))
    def test_suspension(self, cases):
        space = Suspension(Interval(0.0, 1.0))
        self.check_axioms(space, cases)
        for a, b, _ in cases:
            self.assertLessEqual(space.distance(a, b), math.pi)

    @AXIOM_SETTINGS
    @given(product_cases())
    def test_q_product(self, case):
        self.check_axioms(*case)


if __name__ == "__main__":
    unittest.main()
