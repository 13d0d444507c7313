import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.exceptions import DomainError, PreconditionError
from core.gauges import Gauge
from core.norms import ProductNorm
from sets.descriptors import AffineSubspace, Ball

from .ekeland import ekeland_search
from .maxgap import MaxGapInstance, maxgap_eval, maxgap_subdiff, subdiff_conditions
from .slopes import chain_rule_slope, local_slope, nonlocal_slope


class MaxGapTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_examples(self):
        """Direct evaluations of the max gap"""
        self.assertEqual(maxgap_eval(MaxGapInstance([[1, 0]]), ([1, 0], [0, 0])), 0.0)
        xbar = [0.2, -0.7]
        self.assertEqual(maxgap_eval(MaxGapInstance([[0, 0]]), (xbar, xbar)), 0.0)
        self.assertAlmostEqual(maxgap_eval(MaxGapInstance([[0.3, 0.4]]), (xbar, xbar)), 0.5)
        self.assertEqual(maxgap_eval(MaxGapInstance([[1, 0], [0, 1]]), ([2, 0], [0, 0], [0, 0])), 1.0)

    def test_needs_two_sets(self):
        """An instance without shifts is rejected"""
        with self.assertRaises(ValidationError):
            MaxGapInstance([])

    def test_convex_along_segments(self):
        """f(u/2 + w/2) <= f(u)/2 + f(w)/2"""
        for _ in range(300):
            n = int(self.rng.integers(2, 5))
            inst = MaxGapInstance(self.rng.normal(size=(n - 1, 2)))
            u = self.rng.normal(size=(n, 2))
            w = self.rng.normal(size=(n, 2))
            middle = inst.evaluate(0.5 * u + 0.5 * w)
            self.assertLessEqual(middle, 0.5 * inst.evaluate(u) + 0.5 * inst.evaluate(w) + 1e-12)

    def test_flat_function_matches_evaluate(self):
        """Flattened evaluation with a gauge composes correctly"""
        inst = MaxGapInstance([[1, 2], [0, -1]])
        u = self.rng.normal(size=(3, 2))
        gauge = Gauge.holder(2)
        self.assertAlmostEqual(inst.flat_function(gauge)(u.ravel()), inst.evaluate(u) ** 2, places=12)


class SubdifferentialTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(26)

    def test_single_gap(self):
        """Unit residual direction and its negative"""
        duals = maxgap_subdiff(MaxGapInstance([[0, 0]]), ([1, 0], [0, 0]), [1.0])
        np.testing.assert_array_equal(duals[0], [1.0, 0.0])
        np.testing.assert_array_equal(duals[1], [-1.0, 0.0])

    def test_two_active_gaps(self):
        """Equal weights on equal gaps keep the normalization"""
        inst = MaxGapInstance([[1, 0], [0, 1]])
        u = ([2, 0], [0, 0], [0, 0])
        duals = maxgap_subdiff(inst, u, [0.5, 0.5])
        conditions = subdiff_conditions(inst, u, duals)
        self.assertLess(conditions["sum"], 1e-15)
        self.assertLess(abs(conditions["normalization"]), 1e-15)
        self.assertLess(abs(conditions["support"]), 1e-12)

    def test_weight_on_inactive_gap(self):
        """Weights must sit on active gaps"""
        inst = MaxGapInstance([[0, 0], [0, 0]])
        with self.assertRaises(ValidationError):
            maxgap_subdiff(inst, ([0.5, 0], [2, 0], [0, 0]), [1.0, 0.0])

    def test_zero_gap(self):
        """The subdifferential formula needs a positive gap"""
        with self.assertRaises(PreconditionError):
            maxgap_subdiff(MaxGapInstance([[1, 0]]), ([1, 0], [0, 0]))

    def test_random_instances(self):
        """Constructed duals satisfy all subgradient conditions"""
        for _ in range(200):
            n = int(self.rng.choice([2, 3, 4]))
            dim = int(self.rng.choice([2, 3]))
            inst = MaxGapInstance(self.rng.normal(size=(n - 1, dim)))
            u = self.rng.normal(size=(n, dim))
            duals = maxgap_subdiff(inst, u)
            total = np.sum(duals, axis=0)
            self.assertLess(float(np.max(np.abs(total))), 1e-12)
            self.assertLess(abs(sum(np.linalg.norm(x) for x in duals[:-1]) - 1.0), 1e-12)
            self.assertLess(abs(subdiff_conditions(inst, u, duals)["support"]), 1e-9)
            value = inst.evaluate(u)
            for w in self.rng.normal(scale=2.0, size=(100, n, dim)):
                linear = sum(float(np.dot(x, wi - ui)) for x, wi, ui in zip(duals, w, u))
                self.assertGreaterEqual(inst.evaluate(w), value + linear - 1e-9)


def _norm(x):
    return float(np.linalg.norm(x))


class SlopeTest(SimpleTestCase):
    def test_constant(self):
        """Constants have zero slope"""
        self.assertEqual(local_slope(lambda x: 3.0, np.array([1.0, 2.0]), budget=32).value, 0.0)
        self.assertEqual(nonlocal_slope(lambda x: 3.0, np.array([1.0, 2.0]), budget=32).value, 0.0)

    def test_norm_slope(self):
        """Slope of the norm away from the origin is one"""
        estimate = local_slope(_norm, np.array([1.0, 0.0]))
        self.assertAlmostEqual(estimate.value, 1.0, delta=1e-3)
        self.assertEqual(estimate.radius_used, 1e-6)

    def test_squared_norm_slope(self):
        """Slope of a smooth function is its gradient norm"""
        estimate = local_slope(lambda x: float(np.dot(x, x)), np.array([1.0, 0.0]))
        self.assertAlmostEqual(estimate.value, 2.0, delta=1e-3)

    def test_history_nonincreasing(self):
        """Running values never grow as the radius shrinks"""
        estimate = local_slope(lambda x: abs(x[0]) + x[1] ** 2, np.array([0.0, 0.3]), budget=64)
        self.assertTrue(all(a >= b for a, b in zip(estimate.history, estimate.history[1:])))

    def test_infinite_value(self):
        """Infinite values give infinite slope"""
        self.assertEqual(local_slope(lambda x: math.inf, np.array([0.0])).value, math.inf)

    def test_nonlocal_reaches_origin(self):
        """The ratio at u = 0 attains one"""
        estimate = nonlocal_slope(_norm, np.array([1.0, 0.0]), budget=16, extra_points=[np.zeros(2)])
        self.assertAlmostEqual(estimate.value, 1.0, places=12)

    def test_nonlocal_zero_at_minimum(self):
        """Nonnegative functions at a zero have no nonlocal descent"""
        self.assertEqual(nonlocal_slope(lambda x: float(np.dot(x, x)), np.zeros(2), budget=16).value, 0.0)

    def test_local_below_nonlocal(self):
        """Local estimate never exceeds the nonlocal one at equal seeds"""
        rng = np.random.default_rng(4)
        ball = Ball([0, 0], 1)
        for x in rng.uniform(-3, 3, size=(10, 2)):
            local = local_slope(ball.dist, x, budget=32, seed=5)
            wide = nonlocal_slope(ball.dist, x, budget=32, seed=5)
            self.assertLessEqual(local.value, wide.value + 1e-12)


class ChainRuleTest(SimpleTestCase):
    def test_examples(self):
        """Chain rule with the 0 * inf convention"""
        self.assertEqual(chain_rule_slope(Gauge.identity(), 1.3, 0.7), 0.7)
        self.assertEqual(chain_rule_slope(Gauge.holder(2), 3.0, 1.0), 6.0)
        self.assertEqual(chain_rule_slope(Gauge.holder(2), 0.0, math.inf), 0.0)
        self.assertEqual(chain_rule_slope(Gauge.holder(0.5), 0.0, 0.0), 0.0)

    def test_negative_value(self):
        """Negative gap values are outside the gauge domain"""
        with self.assertRaises(DomainError):
            chain_rule_slope(Gauge.identity(), -1.0, 1.0)

    def test_matches_numeric_composition(self):
        """Numeric slope of a composition equals the chain-rule product"""
        ball = Ball([0.0, 0.0], 1.0)
        rng = np.random.default_rng(12)
        directions = rng.normal(size=(50, 2))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        gaps = rng.uniform(0.1, 5.0, size=50)
        for q in (0.5, 1.0, 2.0, 3.0):
            gauge = Gauge.holder(q)
            for direction, gap in zip(directions, gaps):
                x = (1.0 + gap) * direction
                composed = local_slope(lambda u: gauge.value(ball.dist(u)), x, budget=48, seed=1).value
                inner = local_slope(ball.dist, x, budget=48, seed=1).value
                expected = chain_rule_slope(gauge, ball.dist(x), inner)
                self.assertLess(abs(composed - expected) / expected, 1e-3)


class EkelandTest(SimpleTestCase):
    def setUp(self):
        self.balls = [Ball([0, 0], 1), Ball([3, 0], 1)]
        self.inst = MaxGapInstance([[0, 0]])

    def test_start_already_minimal(self):
        """A minimizing start is returned unchanged"""
        result = ekeland_search(
            self.inst.flat_function(), self.balls, ([1, 0], [2, 0]), eps=0.5, lam=1.0,
            norm=ProductNorm(1, 1, 2), inf_estimate=1.0,
        )
        np.testing.assert_array_equal(result.point[0], [1.0, 0.0])
        np.testing.assert_array_equal(result.point[1], [2.0, 0.0])
        self.assertTrue(result.certificate.holds)

    def test_absolute_value_on_line(self):
        """Discounted descent from 1 cannot improve |x|"""
        line = AffineSubspace([0.0], [[1.0]])
        result = ekeland_search(lambda x: abs(float(x[0])), [line], ([1.0],), eps=1.5, lam=1.0)
        self.assertLessEqual(abs(result.point[0][0]), 1.0)
        self.assertLessEqual(result.value, 1.0)
        self.assertTrue(result.within_radius)
        self.assertTrue(result.certificate.holds)
        grid = np.linspace(-5, 5, 2001)
        slack = np.abs(grid) + 1.5 * np.abs(grid - result.point[0][0]) - result.value
        self.assertGreater(float(slack.min()), -1e-9)

    def test_start_not_near_infimum(self):
        """fn(start) must be below the infimum estimate plus eps"""
        line = AffineSubspace([0.0], [[1.0]])
        with self.assertRaises(PreconditionError):
            ekeland_search(lambda x: abs(float(x[0])), [line], ([1.0],), eps=0.5, lam=1.0)

    def test_two_balls_descend_to_closest_pair(self):
        """Descent reaches the closest pair of two disjoint balls"""
        result = ekeland_search(
            self.inst.flat_function(), self.balls, ([0, 0], [3, 0]), eps=2.5, lam=5.0,
            norm=ProductNorm(1, 1, 2), inf_estimate=1.0, seed=3,
        )
        self.assertLessEqual(result.value, 1.0 + 1e-3)
        self.assertGreaterEqual(result.value, 1.0 - 1e-9)
        self.assertTrue(result.within_radius)
        self.assertTrue(result.decreased)
        self.assertTrue(result.certificate.holds)
