import math

import numpy as np
from django.test import SimpleTestCase

from common.choices import CheckStatus
from common.exceptions import PreconditionError
from sets.descriptors import AbsEpigraph, AffineSubspace, Ball, Halfspace
from sets.sampling import Region

from .choices import TerminationKind, TraceSet, TraceStatus
from .rates import (
    HolderParams,
    classify_termination,
    distance_decrease_bound,
    estimate_delta,
    pair_condition_lhs,
    verify_decrease,
    verify_linear_rate,
)
from .trace import run_ap
from .two_sets import two_set_certificate

ANGLES = (math.pi / 6, math.pi / 4, math.pi / 3)


def two_lines(theta):
    axis = AffineSubspace([0.0, 0.0], [[1.0, 0.0]])
    tilted = AffineSubspace([0.0, 0.0], [[math.cos(theta), math.sin(theta)]])
    return axis, tilted


def halfplane_and_epigraph():
    return Halfspace([0.0, 1.0], 0.0), AbsEpigraph(1.0)


class RunAPTest(SimpleTestCase):
    def test_fixed_point(self):
        """A start inside both sets is a fixed point"""
        ball = Ball([0, 0], 1)
        trace = run_ap(ball, ball, [0.2, 0.1])
        self.assertEqual(len(trace), 2)
        self.assertEqual(trace.status, TraceStatus.CONVERGED)
        self.assertEqual(trace.step_norms, [0.0])

    def test_halfplane_and_epigraph(self):
        """Closed-form iterates end in a two-cycle at distance one"""
        a_set, b_set = halfplane_and_epigraph()
        trace = run_ap(a_set, b_set, [2.0, 0.0])
        expected = [[2, 0], [0.5, 1.5], [0.5, 0], [0, 1], [0, 0]]
        np.testing.assert_allclose(trace.iterates, expected, atol=1e-12)
        self.assertEqual(trace.labels, [TraceSet.START, TraceSet.B, TraceSet.A, TraceSet.B, TraceSet.A])
        self.assertEqual(trace.status, TraceStatus.DISTANCE_ATTAINED)
        self.assertAlmostEqual(trace.step_norms[-1], 1.0, places=12)

    def test_two_lines_converge(self):
        """Iterates on two crossing lines go to their intersection"""
        trace = run_ap(*two_lines(math.pi / 6), [1.0, 0.0])
        self.assertEqual(trace.status, TraceStatus.CONVERGED)
        self.assertLess(float(np.linalg.norm(trace.last)), 1e-8)

    def test_max_iter(self):
        """The iteration cap ends the run"""
        trace = run_ap(*halfplane_and_epigraph(), [2.0, 0.0], max_iter=2)
        self.assertEqual(trace.status, TraceStatus.MAX_ITER)
        self.assertEqual(len(trace), 3)

    def test_random_convex_pairs(self):
        """Steps never grow and every step is a normal direction"""
        rng = np.random.default_rng(31)
        for _ in range(100):
            ball = Ball(rng.uniform(-2, 2, size=2), rng.uniform(0.2, 1.5))
            half = Halfspace(rng.normal(size=2), rng.uniform(-1, 1))
            trace = run_ap(half, ball, rng.uniform(-5, 5, size=2), max_iter=200)
            self.assertTrue(trace.is_monotone(1e-9))
            self.assertLessEqual(trace.residuals_normal(1e-9), 1e-9)


class PairConditionTest(SimpleTestCase):
    def test_orthogonal_foot(self):
        """b above the foot a of its projection gives sin(theta)"""
        theta, r = math.pi / 6, 2.0
        a_set, b_set = two_lines(theta)
        b = r * np.array([math.cos(theta), math.sin(theta)])
        a = np.array([r * math.cos(theta), 0.0])
        self.assertAlmostEqual(pair_condition_lhs(a_set, b_set, a, b, 1.0), math.sin(theta), places=12)

    def test_equal_points(self):
        """The pair condition needs distinct points"""
        a_set, b_set = two_lines(math.pi / 4)
        with self.assertRaises(PreconditionError):
            pair_condition_lhs(a_set, b_set, [0, 0], [0, 0], 1.0)

    def test_estimate_two_lines(self):
        """The sampled infimum is sin(theta / 2) from above"""
        for theta in ANGLES:
            value = estimate_delta(*two_lines(theta), q=1.0, region=Region([0, 0], 2), count=120, seed=4)
            self.assertAlmostEqual(value, math.sin(theta / 2), delta=0.02)
            self.assertGreaterEqual(value, math.sin(theta / 2) - 1e-9)

    def test_estimate_epigraph_capped(self):
        """The halfplane and epigraph pair gives a positive delta at most one"""
        value = estimate_delta(*halfplane_and_epigraph(), q=1.0, region=Region([0, 0], 3), count=60, seed=2)
        self.assertGreater(value, 0.0)
        self.assertLessEqual(value, 1.0 + 1e-12)

    def test_cap_warning(self):
        """delta above max(gap^(q-1), 1) is recorded"""
        params = HolderParams(1.0, 1.5)
        params.check_cap(1.0)
        self.assertEqual(len(params.warnings), 1)


class RateTest(SimpleTestCase):
    def test_decrease_with_half_angle(self):
        """delta = sin(theta / 2) passes and an inflated delta fails"""
        for theta in ANGLES:
            trace = run_ap(*two_lines(theta), [1.0, 0.0])
            delta = math.sin(theta / 2)
            report = verify_decrease(trace, HolderParams(1.0, delta), dist=0.0)
            self.assertTrue(report.passed)
            self.assertGreaterEqual(min(c.residual for c in report.checks), -1e-9)
            self.assertFalse(verify_decrease(trace, HolderParams(1.0, 1.5 * delta), dist=0.0).passed)

    def test_decrease_with_estimated_delta(self):
        """A sampled delta shrunk by ten percent passes wherever the decrease is tested"""
        cases = [(two_lines(theta), [1.0, 0.0], Region([0, 0], 2)) for theta in ANGLES]
        cases.append((halfplane_and_epigraph(), [2.0, 0.0], Region([0, 0], 3)))
        for (a_set, b_set), x0, region in cases:
            delta = estimate_delta(a_set, b_set, q=1.0, region=region, count=120, seed=4)
            trace = run_ap(a_set, b_set, x0)
            report = verify_decrease(trace, HolderParams(1.0, 0.9 * delta))
            self.assertFalse(report.vacuous)
            self.assertTrue(report.passed)

    def test_overstated_delta(self):
        """delta = 0.9 fails at the first cycle"""
        trace = run_ap(*two_lines(math.pi / 6), [1.0, 0.0])
        report = verify_decrease(trace, HolderParams(1.0, 0.9), dist=0.0)
        self.assertEqual(report.first_violation, 1)

    def test_decrease_vacuous_at_attainment(self):
        """A trace that only cycles at the distance has nothing to test"""
        trace = run_ap(*halfplane_and_epigraph(), [0.0, 0.0])
        self.assertEqual(trace.status, TraceStatus.DISTANCE_ATTAINED)
        report = verify_decrease(trace, HolderParams(1.0, 0.5))
        self.assertTrue(report.vacuous)
        self.assertTrue(report.passed)

    def test_linear_rate_ratios(self):
        """Within-cycle ratios are cos(theta), same-parity ratios cos^2(theta)"""
        for theta in ANGLES:
            trace = run_ap(*two_lines(theta), [1.0, 0.0])
            report = verify_linear_rate(trace, math.sin(theta / 2))
            self.assertTrue(report.passed)
            self.assertAlmostEqual(report.ratios[10], math.cos(theta), delta=1e-6)
            self.assertAlmostEqual(report.parity_ratios[20], math.cos(theta) ** 2, delta=1e-6)

    def test_zero_delta(self):
        """delta = 0 bounds nothing"""
        trace = run_ap(*two_lines(math.pi / 3), [1.0, 0.0])
        self.assertTrue(verify_linear_rate(trace, 0.0).passed)


class TerminationTest(SimpleTestCase):
    def test_finite_attainment(self):
        """The halfplane and epigraph pair attains its distance at step 4"""
        trace = run_ap(*halfplane_and_epigraph(), [2.0, 0.0])
        report = classify_termination(trace)
        self.assertEqual(report["kind"], TerminationKind.FINITE_ATTAINMENT)
        self.assertEqual(report["index"], 4)
        self.assertAlmostEqual(report["value"], 1.0, places=9)
        self.assertIsNone(report["tail_scope"])

    def test_attainment_from_any_axis_start(self):
        """Starts on the horizontal axis all end at distance one"""
        a_set, b_set = halfplane_and_epigraph()
        for t in np.linspace(-10, 10, 21):
            report = classify_termination(run_ap(a_set, b_set, [t, 0.0]), dist=1.0)
            self.assertEqual(report["kind"], TerminationKind.FINITE_ATTAINMENT)
            self.assertAlmostEqual(report["value"], 1.0, delta=1e-9)

    def test_vanishing_steps(self):
        """Crossing lines give vanishing steps with a finite tail bound"""
        report = classify_termination(run_ap(*two_lines(math.pi / 6), [1.0, 0.0]))
        self.assertEqual(report["kind"], TerminationKind.VANISHING_STEPS)
        self.assertLess(report["tail_bound"], 1e-7)
        self.assertEqual(report["tail_scope"], "geometric estimate")

    def test_undetermined(self):
        """Two projections are not enough to decide"""
        trace = run_ap(*halfplane_and_epigraph(), [2.0, 0.0], max_iter=2)
        self.assertEqual(classify_termination(trace)["kind"], TerminationKind.UNDETERMINED)


class DistanceDecreaseTest(SimpleTestCase):
    def setUp(self):
        self.axis = AffineSubspace([0.0, 0.0], [[1.0, 0.0]])

    def test_counterexample_near_projection(self):
        """Near the foot of b the normal deviation vanishes"""
        report = distance_decrease_bound(self.axis, [0, 0], [0, 2], q=1.0, delta=0.5, lam=1.0)
        self.assertFalse(report.premise_holds)
        self.assertLess(report.witness_value, 0.5)
        self.assertFalse(report.conclusion_holds)
        self.assertTrue(report.consistent)

    def test_vacuous_window(self):
        """Far from the foot no sample enters the window"""
        report = distance_decrease_bound(self.axis, [3, 0], [0, 2], q=1.0, delta=0.5, lam=1.0)
        self.assertTrue(report.vacuous)
        self.assertTrue(report.premise_holds)
        self.assertTrue(report.conclusion_holds)

    def test_b_inside(self):
        """b must lie outside A"""
        with self.assertRaises(PreconditionError):
            distance_decrease_bound(self.axis, [0, 0], [1, 0], q=1.0, delta=0.5, lam=1.0)


class TwoSetCertificateTest(SimpleTestCase):
    def setUp(self):
        self.below = Halfspace([0, 1], 0)
        self.above = Halfspace([0, -1], 0)

    def test_touching_halfplanes(self):
        """Shifting the lower halfplane down by 2 certifies with exact normals"""
        cert = two_set_certificate(self.below, self.above, [0, 0], [0, 2], eps=2.5, q=1.0, lam=1.0, eta=1.0)
        self.assertAlmostEqual(cert.gap, 2.0)
        self.assertEqual(cert.checks["P5.1-3"].lhs, 0.0)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_squared_gauge(self):
        """q = 2 passes with eps scaled to the squared distance"""
        cert = two_set_certificate(self.below, self.above, [0, 0], [0, 2], eps=1.0, q=2.0, lam=1.0, eta=1.0)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_eps_too_small(self):
        """||u|| must be within eps of the translated distance"""
        with self.assertRaises(PreconditionError):
            two_set_certificate(self.below, self.above, [0, 0], [1, 2], eps=0.1, q=1.0, lam=1.0, eta=1.0)
