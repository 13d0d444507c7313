import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.exceptions import DimensionMismatch, PreconditionError, UnsupportedMethodError

from .cones import cone_distance, product_normal_cone_check
from .descriptors import (
    AbsEpigraph,
    AffineSubspace,
    Ball,
    BallRestriction,
    Box,
    FinitePointSet,
    Halfspace,
    Hyperplane,
    Polytope,
    Translate,
    dist,
    normal_cone_dist,
    project,
)
from .sampling import Region, sample_set
from .serializers import descriptor_from_dict


def unit_square_polytope():
    return Polytope([
        Halfspace([1, 0], 1), Halfspace([-1, 0], 0),
        Halfspace([0, 1], 1), Halfspace([0, -1], 0),
    ])


def convex_catalogue():
    return [
        Halfspace([1.0, 2.0], 0.5),
        Hyperplane([1.0, -1.0], 0.3),
        AffineSubspace([1.0, 1.0], [[math.sqrt(0.5), math.sqrt(0.5)]]),
        Ball([0.5, -0.5], 1.3),
        Box([-1.0, 0.0], [0.5, 2.0]),
        Polytope([Halfspace([1, 1], 1), Halfspace([-1, 0], 0), Halfspace([0, -1], 0)]),
        AbsEpigraph(1.0),
        Translate(Ball([0.0, 0.0], 1.0), [2.0, 1.0]),
    ]


class ProjectionExampleTest(SimpleTestCase):
    def test_halfspace_keeps_member(self):
        """Points already in the set are returned unchanged"""
        np.testing.assert_array_equal(project(Halfspace([0, 1], 0), [2, 0]), [2.0, 0.0])

    def test_abs_epigraph_branch(self):
        """Projection lands on the right branch"""
        np.testing.assert_allclose(project(AbsEpigraph(1.0), [2, 0]), [0.5, 1.5], atol=1e-15)

    def test_abs_epigraph_vertex(self):
        """Both branch minimizers infeasible, vertex wins"""
        np.testing.assert_allclose(project(AbsEpigraph(1.0), [0.5, 0]), [0.0, 1.0], atol=1e-15)
        self.assertAlmostEqual(dist(AbsEpigraph(1.0), [0.5, 0]), math.sqrt(1.25), places=14)

    def test_abs_epigraph_against_dense_boundary(self):
        """Closed-form projection matches a dense boundary search"""
        epigraph = AbsEpigraph(1.0)
        u = np.linspace(-6.0, 6.0, 240001)
        boundary = np.column_stack([u, np.abs(u) + 1.0])
        rng = np.random.default_rng(3)
        for x in rng.uniform(-3, 3, size=(40, 2)):
            if epigraph.contains(x):
                continue
            oracle = np.min(np.linalg.norm(boundary - x, axis=1))
            self.assertAlmostEqual(epigraph.dist(x), oracle, delta=1e-4)

    def test_ball_distance(self):
        """Collinear distance to a ball"""
        self.assertEqual(dist(Ball([0, 0], 1), [3, 0]), 2.0)

    def test_member_distance_zero(self):
        """Members are at distance zero"""
        for s in convex_catalogue():
            x = s.project(np.array([0.3, -0.2]))
            self.assertLess(s.dist(x), 1e-9)

    def test_dimension_mismatch(self):
        """Wrong-size points are rejected"""
        with self.assertRaises(DimensionMismatch):
            project(Ball([0, 0], 1), [1, 2, 3])

    def test_finite_point_set_tie_break(self):
        """Equidistant points resolve to the lowest index"""
        points = FinitePointSet([[1, 0], [-1, 0]])
        np.testing.assert_array_equal(points.project([0, 0]), [1.0, 0.0])

    def test_polytope_matches_box(self):
        """Unit-square polytope projects like the unit box"""
        square = unit_square_polytope()
        box = Box([0, 0], [1, 1])
        rng = np.random.default_rng(5)
        for x in rng.uniform(-3, 4, size=(200, 2)):
            np.testing.assert_allclose(square.project(x), box.project(x), atol=1e-12)

    def test_polytope_three_dimensional(self):
        """Simplex projection of a far point lands on the expected face"""
        simplex = Polytope([
            Halfspace([-1, 0, 0], 0), Halfspace([0, -1, 0], 0),
            Halfspace([0, 0, -1], 0), Halfspace([1, 1, 1], 1),
        ])
        np.testing.assert_allclose(simplex.project([1, 1, 1]), [1 / 3, 1 / 3, 1 / 3], atol=1e-12)
        np.testing.assert_allclose(simplex.project([-1, -2, 5]), [0, 0, 1], atol=1e-12)

    def test_polytope_rejects_empty_and_unbounded(self):
        """Empty or unbounded descriptions are invalid"""
        with self.assertRaises(ValidationError):
            Polytope([Halfspace([1, 0], -1), Halfspace([-1, 0], -1), Halfspace([0, 1], 1), Halfspace([0, -1], 1)])
        with self.assertRaises(ValidationError):
            Polytope([Halfspace([1, 0], 1), Halfspace([0, 1], 1)])

    def test_invalid_descriptors(self):
        """Bad parameters are validation errors"""
        with self.assertRaises(ValidationError):
            Ball([0, 0], -1)
        with self.assertRaises(ValidationError):
            Halfspace([0, 0], 1)
        with self.assertRaises(ValidationError):
            AffineSubspace([0, 0], [[1, 1]])
        with self.assertRaises(ValidationError):
            Box([1, 0], [0, 0])
        with self.assertRaises(ValidationError):
            BallRestriction(Ball([0, 0], 1), [5, 0], 1)


class NormalConeTest(SimpleTestCase):
    def test_halfspace_examples(self):
        """Outward normal is in the cone, a slanted vector is at distance one"""
        halfspace = Halfspace([0, 1], 0)
        self.assertEqual(normal_cone_dist(halfspace, [0, 0], [0, 1]), 0.0)
        self.assertAlmostEqual(normal_cone_dist(halfspace, [0, 0], [1, 1]), 1.0)

    def test_ball_example(self):
        """Tangent vector at the bottom of the unit ball"""
        self.assertAlmostEqual(normal_cone_dist(Ball([0, 0], 1), [0, -1], [1, 0]), 1.0)

    def test_interior_cone_is_zero(self):
        """Interior points have the trivial cone"""
        self.assertAlmostEqual(normal_cone_dist(Ball([0, 0], 1), [0.2, 0.1], [3, 4]), 5.0)

    def test_membership_precondition(self):
        """Cones are only defined on the set"""
        with self.assertRaises(PreconditionError):
            normal_cone_dist(Halfspace([0, 1], 0), [0, 1], [0, 1])

    def test_box_corner(self):
        """Corner cone of a box is the outward orthant"""
        box = Box([0, 0], [1, 1])
        self.assertAlmostEqual(box.normal_cone_dist([1, 1], [2, 3]), 0.0)
        self.assertAlmostEqual(box.normal_cone_dist([1, 1], [-2, 3]), 2.0)
        self.assertAlmostEqual(box.normal_cone_dist([1, 0.5], [-2, 3]), math.sqrt(13))

    def test_closed_forms_agree_with_generators(self):
        """Closed-form cone distances match the generator form"""
        rng = np.random.default_rng(9)
        for s in convex_catalogue():
            for x in rng.uniform(-3, 3, size=(25, 2)):
                w = s.project(x)
                v = rng.normal(size=2)
                self.assertAlmostEqual(
                    s.normal_cone_dist(w, v), cone_distance(v, s.normal_cone_generators(w)), places=9
                )

    def test_abs_epigraph_vertex_cone(self):
        """Vertex cone is spanned by both branch normals"""
        epigraph = AbsEpigraph(1.0)
        self.assertAlmostEqual(epigraph.normal_cone_dist([0, 1], [0, -1]), 0.0)
        self.assertAlmostEqual(epigraph.normal_cone_dist([0, 1], [0, 1]), 1.0)

    def test_points_cone_is_whole_space(self):
        """Isolated points have the whole space as normal cone"""
        self.assertEqual(FinitePointSet([[0, 0], [1, 1]]).normal_cone_dist([1, 1], [5, -7]), 0.0)

    def test_nonconvex_restriction_unsupported(self):
        """Ball restrictions of point sets cannot be projected"""
        restricted = BallRestriction(FinitePointSet([[0, 0], [3, 0]]), [0, 0], 1)
        with self.assertRaises(UnsupportedMethodError):
            restricted.project([0.5, 0])

    def test_product_cone_examples(self):
        """Product cone membership is componentwise"""
        lower, upper = Halfspace([0, 1], 0), Halfspace([0, -1], 0)
        self.assertTrue(product_normal_cone_check(lower, upper, [0, 0], [1, 0], [0, 1], [0, -2]))
        self.assertFalse(product_normal_cone_check(lower, upper, [0, 0], [1, 0], [0, 1], [1, 0]))
        self.assertTrue(product_normal_cone_check(lower, upper, [0, 0], [1, 0], [0, 0], [0, 0]))


class ProjectionPropertyTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2024)
        self.region = Region([0.0, 0.0], 4.0)

    def test_variational_characterization(self):
        """<x - Px, z - Px> <= 0 for members z"""
        for s in convex_catalogue():
            members = sample_set(s, self.rng, 100, self.region)
            for x in self.rng.uniform(-4, 4, size=(10, 2)):
                p = s.project(x)
                products = (members - p) @ (x - p)
                self.assertLessEqual(float(products.max()), 1e-9)

    def test_firm_nonexpansiveness(self):
        """||Px - Py||^2 <= <Px - Py, x - y>"""
        for s in convex_catalogue():
            for _ in range(60):
                x, y = self.rng.uniform(-4, 4, size=(2, 2))
                px, py = s.project(x), s.project(y)
                self.assertLessEqual(np.dot(px - py, px - py), np.dot(px - py, x - y) + 1e-9)

    def test_projection_residual_is_normal(self):
        """x - Px lies in the normal cone at Px"""
        for s in convex_catalogue():
            for x in self.rng.uniform(-4, 4, size=(60, 2)):
                p = s.project(x)
                self.assertLessEqual(s.normal_cone_dist(p, x - p), 1e-9 * (1 + np.linalg.norm(x)))

    def test_translate_consistency(self):
        """Projection onto s - b is projection onto s shifted back"""
        for s in convex_catalogue():
            shift = self.rng.normal(size=2)
            moved = Translate(s, shift)
            for x in self.rng.uniform(-4, 4, size=(20, 2)):
                np.testing.assert_array_equal(moved.project(x), s.project(x + shift) - shift)

    def test_zero_translate_is_identity(self):
        """Translating by zero changes nothing"""
        for s in convex_catalogue():
            moved = Translate(s, [0.0, 0.0])
            for x in self.rng.uniform(-4, 4, size=(20, 2)):
                np.testing.assert_array_equal(moved.project(x), s.project(x))

    def test_distance_is_lipschitz(self):
        """|d(x) - d(y)| <= ||x - y||"""
        for s in convex_catalogue() + [FinitePointSet([[0, 0], [1, 2], [-2, 1]])]:
            for _ in range(50):
                x, y = self.rng.uniform(-4, 4, size=(2, 2))
                self.assertLessEqual(abs(s.dist(x) - s.dist(y)), np.linalg.norm(x - y) + 1e-12)

    def test_batch_projection_matches_single(self):
        """project_many agrees with row-wise projection"""
        points = self.rng.uniform(-4, 4, size=(30, 2))
        for s in convex_catalogue():
            expected = np.array([s.project(x) for x in points])
            np.testing.assert_allclose(s.project_many(points), expected, atol=1e-12)

    def test_ball_restriction_projection(self):
        """Dykstra projection onto halfspace-ball intersection"""
        restricted = BallRestriction(Halfspace([0, 1], 0), [0, 0], 1)
        np.testing.assert_allclose(restricted.project([3, 3]), [1, 0], atol=1e-6)
        np.testing.assert_allclose(restricted.project([0.5, 2]), [0.5, 0], atol=1e-6)
        np.testing.assert_allclose(restricted.project([0, -3]), [0, -1], atol=1e-9)
        self.assertTrue(restricted.approximate)


class SerializationTest(SimpleTestCase):
    def test_round_trip(self):
        """to_dict and descriptor_from_dict are inverse"""
        catalogue = convex_catalogue() + [
            unit_square_polytope(),
            FinitePointSet([[0, 1], [2, 3]]),
            BallRestriction(Halfspace([0, 1], 0), [0, 0], 2),
        ]
        for s in catalogue:
            self.assertEqual(descriptor_from_dict(s.to_dict()).to_dict(), s.to_dict())

    def test_unknown_type(self):
        """Unknown variants are validation errors"""
        with self.assertRaises(ValidationError):
            descriptor_from_dict({"type": "torus"})
        with self.assertRaises(ValidationError):
            descriptor_from_dict({"type": "ball", "center": [0, 0]})
