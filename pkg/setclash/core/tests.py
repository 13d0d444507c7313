import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.exceptions import DimensionMismatch, DomainError

from .gauges import Gauge, gauge_eval_suite
from .norms import ProductNorm, dual_product_norm_eval, product_norm_eval
from .vectors import as_vector, flatten, unflatten


class VectorHelperTest(SimpleTestCase):
    def test_rejects_non_finite(self):
        """Vectors with nan or inf coordinates are refused"""
        with self.assertRaises(ValueError):
            as_vector([1.0, math.nan])

    def test_rejects_wrong_dimension(self):
        """An explicit dimension is enforced"""
        with self.assertRaises(DimensionMismatch):
            as_vector([1.0, 2.0], dim=3)

    def test_flatten_round_trip(self):
        """Flattening then splitting gives back the components"""
        parts = (np.array([1.0, 2.0]), np.array([3.0, 4.0]), np.array([5.0, 6.0]))
        restored = unflatten(flatten(parts), 3)
        for before, after in zip(parts, restored):
            np.testing.assert_array_equal(before, after)


class ProductNormTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_examples(self):
        """Max of weighted component norms"""
        self.assertEqual(product_norm_eval(ProductNorm(1, 1, 2), ((3, 0), (0, 4))), 4.0)
        self.assertEqual(product_norm_eval(ProductNorm(2, 1, 2), ((2, 0), (0, 1))), 1.0)
        self.assertEqual(product_norm_eval(ProductNorm(0.3, 7, 3), ((0, 0), (0, 0), (0, 0))), 0.0)

    def test_dual_examples(self):
        """Weighted sum of dual component norms"""
        self.assertEqual(dual_product_norm_eval(ProductNorm(1, 1, 2), ((1, 0), (0, 1))), 2.0)
        self.assertEqual(dual_product_norm_eval(ProductNorm(3, 2, 2), ((1, 0), (0, 1))), 5.0)
        self.assertEqual(dual_product_norm_eval(ProductNorm(3, 2, 2), ((0, 0), (0, 0))), 0.0)

    def test_dimension_mismatch(self):
        """Mismatched component sizes raise a structured error"""
        with self.assertRaises(DimensionMismatch):
            product_norm_eval(ProductNorm(1, 1, 2), ((1, 0), (1, 0, 0)))
        with self.assertRaises(DimensionMismatch):
            product_norm_eval(ProductNorm(1, 1, 3), ((1, 0), (1, 0)))

    def test_invalid_parameters(self):
        """Nonpositive weights or fewer than two slots are rejected"""
        with self.assertRaises(ValidationError):
            ProductNorm(0, 1, 2)
        with self.assertRaises(ValidationError):
            ProductNorm(1, 1, 1)

    def test_norm_axioms_on_random_tuples(self):
        """Triangle inequality and absolute homogeneity"""
        for _ in range(200):
            n = int(self.rng.integers(2, 5))
            norm = ProductNorm(float(self.rng.uniform(0.1, 3)), float(self.rng.uniform(0.1, 3)), n)
            u = self.rng.normal(size=(n, 3))
            w = self.rng.normal(size=(n, 3))
            scale = float(self.rng.normal())
            self.assertLessEqual(norm.evaluate(u + w), norm.evaluate(u) + norm.evaluate(w) + 1e-12)
            self.assertAlmostEqual(norm.evaluate(scale * u), abs(scale) * norm.evaluate(u), delta=1e-12 * (1 + norm.evaluate(u)))

    def test_duality_pairing(self):
        """Pairing is bounded by the product of the norm and its dual"""
        for _ in range(300):
            n = int(self.rng.integers(2, 5))
            norm = ProductNorm(float(self.rng.uniform(0.1, 3)), float(self.rng.uniform(0.1, 3)), n)
            u = self.rng.normal(size=(n, 2))
            x = self.rng.normal(size=(n, 2))
            self.assertLessEqual(ProductNorm.pairing(x, u), norm.evaluate(u) * norm.dual(x) + 1e-9)

    def test_flat_distance_matches_tuple_distance(self):
        """The flat metric agrees with evaluate on reshaped tuples"""
        norm = ProductNorm(0.5, 2.0, 3)
        delta = self.rng.normal(size=(3, 2))
        self.assertAlmostEqual(norm.flat_distance(2)(delta.ravel()), norm.evaluate(delta), places=12)


class GaugeTest(SimpleTestCase):
    def test_holder_suite(self):
        """Closed-form Hölder value, derivative and inverse"""
        value, slope, inverse = gauge_eval_suite(Gauge.holder(2), 3.0)
        self.assertAlmostEqual(value, 9.0)
        self.assertAlmostEqual(slope, 6.0)
        self.assertAlmostEqual(inverse, math.sqrt(3.0))
        self.assertEqual(gauge_eval_suite(Gauge.holder(1, alpha=2), 4.0), (2.0, 0.5, 8.0))

    def test_identity_suite(self):
        """Identity gauge returns its argument and unit slope"""
        self.assertEqual(gauge_eval_suite(Gauge.identity(), 0.7), (0.7, 1.0, 0.7))

    def test_negative_argument(self):
        """Negative arguments are outside the domain"""
        with self.assertRaises(DomainError):
            Gauge.holder(2).value(-1.0)

    def test_derivative_at_zero(self):
        """One-sided derivative at zero, infinite when q < 1"""
        self.assertEqual(Gauge.holder(0.5).derivative(0.0), math.inf)
        self.assertEqual(Gauge.holder(2).derivative(0.0), 0.0)
        self.assertEqual(Gauge.holder(1, alpha=4).derivative(0.0), 0.25)

    def test_round_trip(self):
        """phi^{-1}(phi(t)) = t on [0, 1000]"""
        grid = np.linspace(0.0, 1000.0, 401)
        for gauge in (Gauge.identity(), Gauge.holder(2), Gauge.holder(0.5, 3.0), Gauge.holder(3, 0.2)):
            for t in grid:
                self.assertAlmostEqual(gauge.inverse(gauge.value(t)), t, delta=1e-9 * max(1.0, t))

    def test_holder_derivative_matches_finite_differences(self):
        """Central differences agree with the closed form"""
        for q in (0.5, 1.0, 2.0, 3.0):
            gauge = Gauge.holder(q, alpha=1.5)
            for t in np.geomspace(0.1, 100.0, 40):
                h = 1e-6 * t
                numeric = (gauge.value(t + h) - gauge.value(t - h)) / (2 * h)
                self.assertLess(abs(numeric - gauge.derivative(t)) / gauge.derivative(t), 1e-6)

    def test_custom_gauge_uses_bracketed_inverse(self):
        """Custom gauges without an inverse are inverted numerically"""
        gauge = Gauge.custom(lambda t: t + t**3, lambda t: 1 + 3 * t**2)
        self.assertAlmostEqual(gauge.inverse(gauge.value(1.7)), 1.7, places=10)

    def test_custom_gauge_validation(self):
        """Non-monotone custom gauges are rejected"""
        with self.assertRaises(ValidationError):
            Gauge.custom(lambda t: math.sin(t), lambda t: math.cos(t))
        with self.assertRaises(ValidationError):
            Gauge.custom(lambda t: t + 1.0, lambda t: 1.0)

    def test_dict_round_trip(self):
        """JSON form rebuilds an equal gauge"""
        gauge = Gauge.from_dict(Gauge.holder(2, 0.5).to_dict())
        self.assertEqual((gauge.kind, gauge.q, gauge.alpha), ("holder", 2.0, 0.5))
