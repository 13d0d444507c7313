"""Named inequality checks recorded by certificates and reports."""

from dataclasses import dataclass, field
import math

from .choices import Relation


@dataclass(frozen=True)
class InequalityCheck:
    """One evaluated inequality ``lhs <relation> rhs``.

    ``residual`` is the signed slack ``rhs - lhs`` (for equalities the
    negated absolute difference), so a passing check always has a residual
    at or above the acceptance threshold used for its relation.
    """

    tag: str
    lhs: float
    rhs: float
    relation: str
    residual: float
    passed: bool
    note: str = ""

    def as_dict(self):
        return {
            "tag": self.tag,
            "lhs": _json_float(self.lhs),
            "rhs": _json_float(self.rhs),
            "relation": self.relation,
            "residual": _json_float(self.residual),
            "pass": self.passed,
            "note": self.note,
        }


def _json_float(value):
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def strict_less(tag, lhs, rhs, margin=1e-12, note=""):
    """``lhs < rhs`` with a numeric margin."""
    lhs, rhs = float(lhs), float(rhs)
    if math.isinf(rhs) and rhs > 0:
        residual = math.inf if not math.isinf(lhs) else math.nan
    else:
        residual = rhs - lhs
    passed = not math.isnan(residual) and residual >= margin
    return InequalityCheck(tag, lhs, rhs, Relation.LESS, residual, passed, note)


def less_equal(tag, lhs, rhs, tol=1e-9, note=""):
    """``lhs <= rhs`` up to ``tol``."""
    lhs, rhs = float(lhs), float(rhs)
    residual = rhs - lhs
    passed = not math.isnan(residual) and residual >= -tol
    return InequalityCheck(tag, lhs, rhs, Relation.LESS_EQUAL, residual, passed, note)


def equal(tag, lhs, rhs, tol=1e-9, note=""):
    """``lhs == rhs`` up to ``tol``."""
    lhs, rhs = float(lhs), float(rhs)
    residual = -abs(lhs - rhs)
    passed = not math.isnan(residual) and residual >= -tol
    return InequalityCheck(tag, lhs, rhs, Relation.EQUAL, residual, passed, note)


@dataclass
class CheckList:
    """Ordered collection of checks keyed by tag."""

    checks: dict = field(default_factory=dict)

    def add(self, check):
        self.checks[check.tag] = check
        return check

    def __getitem__(self, tag):
        return self.checks[tag]

    def __contains__(self, tag):
        return tag in self.checks

    def __iter__(self):
        return iter(self.checks.values())

    def __len__(self):
        return len(self.checks)

    @property
    def passed(self):
        return all(check.passed for check in self.checks.values())

    def failures(self):
        return [check for check in self.checks.values() if not check.passed]

    def as_dict(self):
        return {tag: check.as_dict() for tag, check in self.checks.items()}
