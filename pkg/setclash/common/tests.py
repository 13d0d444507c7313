import math

from django.test import SimpleTestCase, override_settings

from .checks import CheckList, equal, less_equal, strict_less
from .choices import Relation
from .conf import get_setting, resolve
from .exceptions import DomainError, PreconditionError, SetclashError


class InequalityCheckTest(SimpleTestCase):
    def test_strict_less(self):
        """Residual is rhs - lhs and must clear the margin"""
        check = strict_less("T12-3", 1.0, 2.5)
        self.assertTrue(check.passed)
        self.assertEqual(check.residual, 1.5)
        self.assertEqual(check.relation, Relation.LESS)
        self.assertFalse(strict_less("T12-3", 1.0, 1.0).passed)

    def test_strict_less_against_infinity(self):
        """A finite value is below +inf, an infinite one is undecided"""
        self.assertTrue(strict_less("T17-4", 3.0, math.inf).passed)
        self.assertFalse(strict_less("T17-4", math.inf, math.inf).passed)

    def test_less_equal_tolerance(self):
        """Small violations inside the tolerance still pass"""
        self.assertTrue(less_equal("T17-1", 1.0 + 1e-12, 1.0).passed)
        self.assertFalse(less_equal("T17-1", 1.1, 1.0).passed)

    def test_equal(self):
        """Equality residuals are negated absolute differences"""
        check = equal("T17-2", 1.0, 1.0 + 1e-3)
        self.assertFalse(check.passed)
        self.assertAlmostEqual(check.residual, -1e-3)

    def test_as_dict_renders_infinities(self):
        """Infinite values become JSON-safe strings"""
        data = strict_less("T17-4", 3.0, math.inf).as_dict()
        self.assertEqual(data["rhs"], "inf")
        self.assertEqual(data["residual"], "inf")
        self.assertTrue(data["pass"])


class CheckListTest(SimpleTestCase):
    def test_collects_by_tag(self):
        """Checks are keyed by tag and failures are listed in order"""
        checks = CheckList()
        checks.add(strict_less("a", 0.0, 1.0))
        checks.add(less_equal("b", 2.0, 1.0))
        self.assertIn("a", checks)
        self.assertEqual(len(checks), 2)
        self.assertFalse(checks.passed)
        self.assertEqual([c.tag for c in checks.failures()], ["b"])
        self.assertEqual(set(checks.as_dict()), {"a", "b"})


class ConfTest(SimpleTestCase):
    @override_settings(SETCLASH_TOL=1e-6)
    def test_settings_override(self):
        """Project settings win over library defaults"""
        self.assertEqual(get_setting("SETCLASH_TOL"), 1e-6)

    def test_resolve_prefers_explicit(self):
        """Explicit values bypass settings"""
        self.assertEqual(resolve(5, "SETCLASH_AP_MAX_ITER"), 5)
        self.assertEqual(resolve(None, "SETCLASH_AP_MAX_ITER"), get_setting("SETCLASH_AP_MAX_ITER"))


class ExceptionTest(SimpleTestCase):
    def test_precondition_tag_in_message(self):
        """The violated condition prefixes the message"""
        error = PreconditionError("gap is zero", tag="L6-2")
        self.assertEqual(str(error), "L6-2: gap is zero")
        self.assertIsInstance(error, SetclashError)

    def test_domain_error_is_value_error(self):
        """Domain errors can be caught as ValueError"""
        self.assertTrue(issubclass(DomainError, ValueError))
