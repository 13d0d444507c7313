import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.choices import CheckStatus
from common.exceptions import PreconditionError, UnsupportedMethodError
from core.gauges import Gauge
from sets.descriptors import AbsEpigraph, AffineSubspace, Ball, Box, Halfspace, Polytope
from sets.sampling import Region

from .certificates import dual_certificate, holder_certificate, primal_certificate, reverify
from .choices import GridOutcome
from .collection import Collection, asymmetric_reduce
from .index import check_nonintersection, index_report, nonintersect_index
from .probe import stationarity_probe
from .tasks import probe_epsilon


def random_convex_set(rng, center, size):
    """A ball, square or triangle around ``center`` with inradius ``size`` and circumradius at most ``2 size``."""
    kind = rng.integers(3)
    if kind == 0:
        return Ball(center, size)
    if kind == 1:
        return Box(center - size, center + size)
    phase = rng.uniform(0, 2 * math.pi)
    faces = []
    for k in range(3):
        normal = np.array([math.cos(phase + 2 * math.pi * k / 3), math.sin(phase + 2 * math.pi * k / 3)])
        faces.append(Halfspace(normal, float(normal @ center) + size))
    return Polytope(faces)


class AsymmetricReduceTest(SimpleTestCase):
    def test_last_shift_zero(self):
        """With a_n = 0 the first shifts are kept"""
        reduced = asymmetric_reduce([[1, 0], [0, 1], [0, 0]])
        np.testing.assert_array_equal(reduced, [[1, 0], [0, 1]])

    def test_difference(self):
        """Two shifts reduce to their difference"""
        np.testing.assert_array_equal(asymmetric_reduce([[1, 0], [2, 0]]), [[-1, 0]])

    def test_recentred(self):
        """Base points move into the shifts"""
        np.testing.assert_array_equal(asymmetric_reduce([[0, 0]], [[0, 0], [3, 0]]), [[-3, 0]])

    def test_count_mismatch(self):
        """n base points need n - 1 shifts"""
        with self.assertRaises(ValidationError):
            asymmetric_reduce([[0, 0], [1, 1]], [[0, 0], [3, 0]])


class CollectionTest(SimpleTestCase):
    def test_single_set(self):
        """Collections need at least two sets"""
        with self.assertRaises(ValidationError):
            Collection([Ball([0, 0], 1)])

    def test_common_point_outside(self):
        """The common point must lie in every set"""
        with self.assertRaises(ValidationError):
            Collection([Ball([0, 0], 1), Ball([3, 0], 1)], common_point=[0, 0])

    def test_symmetric_forms(self):
        """Symmetric shifts reduce and pad consistently"""
        coll = Collection([Ball([0, 0], 1)] * 3, shifts=[[1, 0], [0, 1], [1, 1]])
        self.assertTrue(coll.is_symmetric)
        np.testing.assert_array_equal(coll.asymmetric_shifts(), [[0, -1], [-1, 0]])

    def test_dict_round_trip(self):
        """Collections rebuild from their JSON form"""
        coll = Collection([Ball([0, 0], 1), Halfspace([0, 1], 0)], shifts=[[0.5, 0]], common_point=[0, 0])
        rebuilt = Collection.from_dict(coll.to_dict())
        self.assertEqual(rebuilt.to_dict(), coll.to_dict())


class NonintersectIndexTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.balls = [Ball([0, 0], 1), Ball([3, 0], 1)]

    def test_two_balls(self):
        """Exact and grid values match the ball distance"""
        self.assertAlmostEqual(nonintersect_index(self.balls, "exact2"), 1.0, places=9)
        self.assertAlmostEqual(nonintersect_index(self.balls, "grid", h=0.01), 1.0, delta=0.02)

    def test_common_point(self):
        """Intersecting sets have index zero"""
        sets = [Ball([0, 0], 1), Ball([1, 0], 1)]
        self.assertLess(nonintersect_index(sets, "exact2"), 1e-9)
        self.assertLess(nonintersect_index(sets, "grid", h=0.01), 0.01)

    def test_halfplane_and_abs_epigraph(self):
        """The halfplane below the axis is at distance one from v >= |u| + 1"""
        sets = [Halfspace([0, 1], 0), AbsEpigraph(1.0)]
        self.assertAlmostEqual(nonintersect_index(sets, "exact2"), 1.0, places=9)

    def test_random_pairs(self):
        """exact2 and a 0.01 grid agree on 20 disjoint pairs and vanish on 20 intersecting ones"""
        for i in range(40):
            first_size, second_size = self.rng.uniform(0.1, 0.3, size=2)
            center = self.rng.uniform(-2, 2, size=2)
            angle = self.rng.uniform(0, 2 * math.pi)
            direction = np.array([math.cos(angle), math.sin(angle)])
            meets = i % 2 == 1
            if meets:
                offset = 0.5 * second_size
            else:
                gap = self.rng.uniform(0.1, 1.0)
                offset = 2 * first_size + 2 * second_size + gap
            sets = [
                random_convex_set(self.rng, center, first_size),
                random_convex_set(self.rng, center + offset * direction, second_size),
            ]
            exact = nonintersect_index(sets, "exact2")
            grid = nonintersect_index(sets, "grid", h=0.01)
            if meets:
                self.assertLess(exact, 1e-8)
                self.assertLess(grid, 0.01)
            else:
                self.assertGreaterEqual(exact, gap - 1e-9)
                self.assertAlmostEqual(grid, exact, delta=0.02)

    def test_tangent_balls(self):
        """Touching balls away from the origin have index exactly zero"""
        report = index_report([Ball([3, 4], 1), Ball([5, 4], 1)], "exact2")
        self.assertEqual(report["index"], 0.0)
        self.assertTrue(report["converged"])

    def test_cycle_cap_reported(self):
        """A tangent box and ball stopped after 50 cycles are flagged unconverged"""
        report = index_report([Box([4, 3], [5, 5]), Ball([3, 4], 1)], "exact2", max_iter=50)
        self.assertFalse(report["converged"])
        self.assertGreater(report["index"], 0.0)
        self.assertTrue(index_report(self.balls, "exact2")["converged"])

    def test_monotone_in_radius(self):
        """Enlarging a set never increases the index"""
        previous = math.inf
        for radius in (0.5, 0.8, 1.2, 1.9):
            value = nonintersect_index([Ball([0, 0], 1), Ball([3, 0], radius)], "exact2")
            self.assertLessEqual(value, previous + 1e-12)
            previous = value

    def test_exact2_needs_two_sets(self):
        """exact2 is a two-set method"""
        with self.assertRaises(UnsupportedMethodError):
            nonintersect_index(self.balls + [Ball([0, 3], 1)], "exact2")

    def test_cyclic_flagged_upper_bound(self):
        """Cyclic reports are marked as upper bounds"""
        report = index_report(self.balls + [Ball([1.5, 3], 1)], "cyclic", budget=200)
        self.assertTrue(report["upper_bound"])
        self.assertGreater(report["index"], 0.0)


class CheckNonintersectionTest(SimpleTestCase):
    def test_disjoint_balls(self):
        """A unit gap is certified on a 0.1 grid"""
        coll = Collection([Ball([0, 0], 1), Ball([3, 0], 1)])
        self.assertEqual(check_nonintersection(coll, h=0.1).outcome, GridOutcome.CERTIFIED_DISJOINT)

    def test_identical_balls(self):
        """The shared centre is the witness"""
        coll = Collection([Ball([0.5, 0.5], 1), Ball([0.5, 0.5], 1)])
        result = check_nonintersection(coll, h=0.1)
        self.assertEqual(result.outcome, GridOutcome.WITNESS)
        np.testing.assert_allclose(result.witness, [0.5, 0.5], atol=1e-9)

    def test_gap_below_resolution(self):
        """A gap of 0.05 cannot be resolved with h = 0.1"""
        coll = Collection([Ball([0, 0], 1), Ball([2.05, 0], 1)])
        result = check_nonintersection(coll, h=0.1)
        self.assertEqual(result.outcome, GridOutcome.INCONCLUSIVE)
        self.assertAlmostEqual(result.refined_gap, 0.025, delta=1e-6)

    def test_bad_step(self):
        """The grid step must be positive"""
        coll = Collection([Ball([0, 0], 1), Ball([3, 0], 1)])
        with self.assertRaises(ValidationError):
            check_nonintersection(coll, h=0.0)

    def test_unbounded_without_region(self):
        """Unbounded collections need a search region"""
        coll = Collection([Halfspace([0, 1], 0), Halfspace([0, -1], 0)])
        with self.assertRaises(ValidationError):
            check_nonintersection(coll)

    def test_symmetric_matches_reduced(self):
        """Symmetric shifts and their reduced form agree on a shared region"""
        sets = [Ball([0, 0], 1), Ball([0, 0], 1), Ball([1, 0], 1)]
        region = Region([0, 0], 4)
        for shifts in ([[2, 0], [0, 2], [-1, 0]], [[0.2, 0], [0, 0.2], [0, 0]], [[3, 0], [0, 0], [0, 0]]):
            symmetric = check_nonintersection(Collection(sets, shifts=shifts), region=region, h=0.1)
            reduced = check_nonintersection(
                Collection(sets, shifts=asymmetric_reduce(shifts)), region=region, h=0.1
            )
            self.assertEqual(symmetric.outcome, reduced.outcome)


class PrimalCertificateTest(SimpleTestCase):
    def setUp(self):
        self.coll = Collection([Ball([0, 0], 1), Ball([0, 0], 1)], shifts=[[3, 0]], common_point=[0, 0])

    def test_identity_gauge(self):
        """Ekeland stays at x_bar and the sampled slope is at most 2"""
        cert = primal_certificate(self.coll, Gauge.identity(), eps=2.4, lam=1.0, eta=1.0)
        np.testing.assert_allclose(cert.omegas, [[0, 0], [0, 0]], atol=1e-12)
        self.assertAlmostEqual(cert.gap, 3.0)
        self.assertAlmostEqual(cert.index, 1.0, places=9)
        self.assertGreaterEqual(cert.checks["T12-2"].residual, 0.4 - 1e-9)
        self.assertTrue(cert.checks["T12-3.upper"].passed)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_holder_gauge(self):
        """Squared gap moves both points inwards until 4 * gap = 8.8"""
        cert = primal_certificate(self.coll, Gauge.holder(2), eps=9.6, lam=1.0, eta=1.0)
        self.assertAlmostEqual(cert.gap, 2.2, delta=0.05)
        self.assertTrue(cert.checks["T12-5"].passed)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_translated_sets_intersect(self):
        """A small shift leaves the sets overlapping"""
        coll = Collection([Ball([0, 0], 1), Ball([0, 0], 1)], shifts=[[0.5, 0]], common_point=[0, 0])
        with self.assertRaises(PreconditionError) as raised:
            primal_certificate(coll, None, eps=1.0, lam=1.0, eta=1.0)
        self.assertEqual(raised.exception.tag, "P10-1")

    def test_gauge_precondition(self):
        """eps too small for the shift length"""
        with self.assertRaises(PreconditionError) as raised:
            primal_certificate(self.coll, None, eps=1.5, lam=1.0, eta=1.0)
        self.assertEqual(raised.exception.tag, "T12-1")

    def test_ball_needs_rho_above_eta(self):
        """The augmented ball must sit inside the rho ball"""
        with self.assertRaises(PreconditionError):
            primal_certificate(self.coll, None, eps=2.4, lam=1.0, eta=1.0, variant="T14", rho=0.5)

    def test_reverify(self):
        """Residuals recompute exactly from the stored points"""
        cert = primal_certificate(self.coll, None, eps=2.4, lam=1.0, eta=1.0)
        for check in reverify(cert, self.coll):
            self.assertAlmostEqual(check.residual, cert.checks[check.tag].residual, delta=1e-12)

    def test_as_dict(self):
        """Reports carry status, residuals and original-coordinate shifts"""
        data = primal_certificate(self.coll, None, eps=2.4, lam=1.0, eta=1.0).as_dict()
        self.assertEqual(data["status"], "passed")
        self.assertEqual(data["shifts"], [[3.0, 0.0]])
        self.assertIn("T12-2", data["residuals"])


class DualCertificateTest(SimpleTestCase):
    def setUp(self):
        self.coll = Collection([Ball([0, 0], 1), Ball([0, 0], 1)], shifts=[[3, 0]], common_point=[0, 0])
        self.separated = Collection(
            [Halfspace([0, 1], 0), Ball([0, 2], 1)], base_points=[[0, 0], [0, 1]]
        )

    def test_common_point(self):
        """Duals are the unit gap direction and its negative"""
        cert = dual_certificate(self.coll, None, eps=2.4, lam=1.0, eta=1.0)
        np.testing.assert_allclose(cert.duals, [[1, 0], [-1, 0]], atol=1e-12)
        self.assertAlmostEqual(cert.checks["T17-2"].lhs, 2.0)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_normalization_exact(self):
        """Dual vectors sum to zero and the leading norms to one"""
        cert = dual_certificate(self.coll, Gauge.holder(2), eps=9.6, lam=1.0, eta=1.0)
        self.assertLess(float(np.linalg.norm(np.sum(cert.duals, axis=0))), 1e-12)
        self.assertAlmostEqual(float(np.linalg.norm(cert.duals[0])), 1.0, places=12)

    def test_separated_pair(self):
        """Closest points of a halfplane and a ball give exact normals"""
        cert = dual_certificate(self.separated, None, eps=0.5, lam=1.0, eta=1.0, tau=0.99, variant="ZhNg")
        np.testing.assert_allclose(cert.omegas, [[0, 0], [0, 1]], atol=1e-12)
        np.testing.assert_allclose(cert.duals, [[0, 1], [0, -1]], atol=1e-12)
        self.assertAlmostEqual(cert.checks["ZN-2"].lhs, 0.0)
        self.assertIn("ZN-4", cert.checks)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_holder_orders(self):
        """Hölder residuals pass for q = 1 and q = 2"""
        for q in (1.0, 2.0):
            cert = holder_certificate(self.separated, q, 1.0, eps=0.5, lam=1.0, eta=1.0, variant="ZhNg")
            self.assertTrue(cert.checks["C4.5-2"].passed)
            self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_ball_augmented(self):
        """Symmetric shifts around a shared ball certify with the augmented set"""
        coll = Collection(
            [Ball([0, 0], 1), Ball([0, 0], 1)], shifts=[[1.5, 0], [-1.5, 0]], common_point=[0, 0]
        )
        cert = dual_certificate(coll, None, eps=1.5, lam=1.0, eta=1.0, variant="T19", rho=2.0)
        self.assertAlmostEqual(cert.primal.index, 0.5, delta=0.02)
        self.assertEqual(len(cert.omegas), 3)
        self.assertIn("T19-1.norm", cert.checks)
        self.assertEqual(cert.status, CheckStatus.PASSED)

    def test_tau_range(self):
        """tau must lie strictly between 0 and 1"""
        with self.assertRaises(ValidationError):
            dual_certificate(self.coll, None, eps=2.4, lam=1.0, eta=1.0, tau=1.0)

    def test_reverify(self):
        """Dual residuals recompute exactly"""
        cert = dual_certificate(self.separated, None, eps=0.5, lam=1.0, eta=1.0, variant="ZhNg")
        recomputed = reverify(cert, self.separated)
        self.assertEqual(set(c.tag for c in recomputed), set(c.tag for c in cert.checks))
        for check in recomputed:
            self.assertAlmostEqual(check.residual, cert.checks[check.tag].residual, delta=1e-12)


class StationarityProbeTest(SimpleTestCase):
    def test_coincident_lines(self):
        """A perpendicular shift separates two copies of a line"""
        line = AffineSubspace([0, 0], [[1, 0]])
        coll = Collection([line, line], common_point=[0, 0])
        report = stationarity_probe(coll, [0.5, 0.25], region=Region([0, 0], 1), directions=2, samples=1)
        self.assertTrue(all(report["summary"].values()))
        self.assertEqual([item["eps"] for item in report["results"]], [0.5, 0.25])
        self.assertIn("evidence", report["caveat"])

    def test_touching_halfplanes(self):
        """Halfplanes meeting along a line are extremal"""
        coll = Collection([Halfspace([0, 1], 0), Halfspace([0, -1], 0)], common_point=[0, 0])
        report = stationarity_probe(coll, [0.5], region=Region([0, 0], 1), directions=2, samples=1)
        self.assertTrue(report["summary"]["extremal"])

    def test_identical_halfplanes(self):
        """Small shifts of one halfplane never empty the intersection"""
        half = Halfspace([0, 1], 0)
        coll = Collection([half, half], common_point=[0, 0])
        report = stationarity_probe(coll, [0.5], region=Region([0, 0], 1), directions=2, samples=1)
        self.assertFalse(any(report["summary"].values()))

    def test_needs_common_point(self):
        """The probe is anchored at a common point"""
        coll = Collection([Ball([0, 0], 1), Ball([3, 0], 1)])
        with self.assertRaises(PreconditionError):
            stationarity_probe(coll, [0.5])

    def test_eps_must_decrease(self):
        """eps values are tested from large to small"""
        coll = Collection([Ball([0, 0], 1), Ball([1, 0], 1)], common_point=[0.5, 0])
        with self.assertRaises(ValidationError):
            stationarity_probe(coll, [0.1, 0.5])

    def test_unbounded_needs_region(self):
        """Unbounded sets need an explicit region"""
        half = Halfspace([0, 1], 0)
        with self.assertRaises(ValidationError):
            stationarity_probe(Collection([half, half], common_point=[0, 0]), [0.5])

    def test_task_payload(self):
        """The Celery task runs one eps from JSON"""
        line = AffineSubspace([0, 0], [[1, 0]])
        coll = Collection([line, line], common_point=[0, 0])
        payload = {
            "collection": coll.to_dict(),
            "eps": 0.5,
            "region": Region([0, 0], 1).to_dict(),
            "h": 0.05,
            "rho": 1.0,
            "directions": 2,
            "samples": 1,
        }
        result = probe_epsilon(payload)
        self.assertTrue(result["properties"]["extremal"]["found"])
