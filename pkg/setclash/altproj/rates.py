"""Decrease and rate checks for alternating projections.

The pair condition
``max{ ||b - a||^(q-2) d(b - a, N_A(a)), ||b - a||^(-1) d(a - b, N_B(b)) } >= delta``
over pairs with ``d(b, A) > d(A, B)`` drives the per-cycle decrease
``||x_{2n} - x_{2n-1}||^q <= ||x_{2n-1} - x_{2n-2}||^q - q delta^2 ||x_{2n-1} - x_{2n-2}||``.
The condition quantifies over all pairs, so every check here is sampled:
an estimated ``delta`` is an upper bound of the true infimum.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from django.core.exceptions import ValidationError

from common.checks import CheckList, less_equal
from common.conf import resolve
from common.exceptions import PreconditionError
from conditions.index import nonintersect_index
from sets.sampling import Region, sample_set

from .choices import TerminationKind, TraceStatus

logger = logging.getLogger(__name__)

DEFAULT_PAIR_SAMPLES = 200
PREMISE_MARGIN = 1e-9


@dataclass
class HolderParams:
    q: float
    delta: float
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.q > 0 and self.delta >= 0):
            raise ValidationError(f"HolderParams need q > 0 and delta >= 0, got {self.q}, {self.delta}")

    def check_cap(self, gap):
        """Record a warning when ``delta > max(gap^(q-1), 1)``."""
        cap = max(gap ** (self.q - 1.0), 1.0) if gap > 0 else 1.0
        if self.delta > cap:
            message = f"delta={self.delta:.6g} exceeds max(gap^(q-1), 1)={cap:.6g}"
            self.warnings.append(message)
            logger.warning(message)
        return cap


def _distance_between(a_set, b_set, value=None):
    return float(nonintersect_index([a_set, b_set])) if value is None else float(value)


def pair_condition_lhs(a_set, b_set, a, b, q, tol=None):
    """Left side of the pair condition at ``a`` in A and ``b`` in B.

    Raises:
        PreconditionError: ``a == b`` or a point outside its set.
    """
    tol = resolve(tol, "SETCLASH_TOL")
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    gap = float(np.linalg.norm(b - a))
    if gap == 0.0:
        raise PreconditionError("The pair condition needs a != b", tag="C5.4-1")
    first = gap ** (q - 2.0) * a_set.normal_cone_dist(a, b - a, tol)
    second = b_set.normal_cone_dist(b, a - b, tol) / gap
    return max(first, second)


def estimate_delta(a_set, b_set, q=1.0, region=None, count=DEFAULT_PAIR_SAMPLES, seed=0, margin=PREMISE_MARGIN, dist=None):
    """Smallest sampled pair-condition value over admissible pairs.

    ``count`` points are sampled from each set inside ``region`` and all
    ``count**2`` pairs with ``d(b, A) > d(A, B) + margin`` are scored.

    Returns:
        Estimate of ``delta``; an upper bound of the true infimum.

    Raises:
        ValidationError: No region for unbounded sets, or no admissible pair.
    """
    if region is None:
        boxes = [box for box in (a_set.bounds(), b_set.bounds()) if box is not None]
        if not boxes:
            raise ValidationError("estimate_delta needs a region when both sets are unbounded")
        region = Region.around(boxes)
    dist = _distance_between(a_set, b_set, dist)
    rng = np.random.default_rng(seed)
    a_points = sample_set(a_set, rng, count, region)
    b_points = sample_set(b_set, rng, count, region)
    b_points = b_points[a_set.dist_many(b_points) > dist + margin]
    if len(b_points) == 0:
        raise ValidationError("No admissible pair with d(b, A) > d(A, B) was sampled")
    best, pairs = math.inf, 0
    for b in b_points:
        for a in a_points:
            if np.array_equal(a, b):
                continue
            best = min(best, pair_condition_lhs(a_set, b_set, a, b, q))
            pairs += 1
    logger.info(f"delta estimate {best:.6g} from {pairs} sampled pairs (upper bound)")
    return best


@dataclass
class CycleReport:
    """Per-cycle inequality checks of one trace."""

    checks: CheckList
    skipped: list
    ratios: list = field(default_factory=list)
    parity_ratios: list = field(default_factory=list)

    @property
    def passed(self):
        return self.checks.passed

    @property
    def vacuous(self):
        return len(self.checks) == 0

    @property
    def first_violation(self):
        failures = self.checks.failures()
        return int(failures[0].tag.rsplit(".", 1)[1]) if failures else None

    def as_dict(self):
        return {
            "passed": self.passed,
            "vacuous": self.vacuous,
            "first_violation": self.first_violation,
            "skipped_cycles": self.skipped,
            "ratios": self.ratios,
            "parity_ratios": self.parity_ratios,
            "checks": self.checks.as_dict(),
            "scope": "sampled hypothesis",
        }


def decrease_terms(s_in, s_out, q, delta):
    """``(lhs, rhs)`` of the per-cycle decrease inequality."""
    return s_out**q, s_in**q - q * delta**2 * s_in


def verify_decrease(trace, params, dist=None, tol=None):
    """Check the per-cycle decrease on every cycle whose premise holds.

    A cycle is tested when ``d(x_{2n-1}, A) = ||x_{2n} - x_{2n-1}||``
    exceeds ``d(A, B)`` by ``tol``; the others are listed as skipped.
    """
    tol = resolve(tol, "SETCLASH_TOL")
    dist = _distance_between(trace.a_set, trace.b_set, dist)
    params.check_cap(dist)
    checks, skipped = CheckList(), []
    for n, s_in, s_out in trace.cycles():
        if not s_out > dist + tol:
            skipped.append(n)
            continue
        lhs, rhs = decrease_terms(s_in, s_out, params.q, params.delta)
        checks.add(less_equal(f"C5.4-2.{n}", lhs, rhs, tol))
    report = CycleReport(checks, skipped)
    if not report.passed:
        logger.warning(f"Decrease violated first at cycle {report.first_violation}")
    return report


def step_ratios(trace):
    """Within-cycle ratios ``s_out / s_in`` and same-parity ratios ``step_k / step_{k-2}``."""
    steps = trace.step_norms
    ratios = [s_out / s_in for _, s_in, s_out in trace.cycles() if s_in > 0]
    parity = [steps[k] / steps[k - 2] for k in range(2, len(steps)) if steps[k - 2] > 0]
    return ratios, parity


def verify_linear_rate(trace, delta, tol=None):
    """Check ``||x_{2n} - x_{2n-1}|| <= (1 - delta^2) ||x_{2n-1} - x_{2n-2}||`` on every cycle."""
    tol = resolve(tol, "SETCLASH_TOL")
    factor = 1.0 - delta**2
    checks = CheckList()
    for n, s_in, s_out in trace.cycles():
        checks.add(less_equal(f"C5.6-1.{n}", s_out, factor * s_in, tol))
    ratios, parity = step_ratios(trace)
    return CycleReport(checks, [], ratios, parity)


def classify_termination(trace, dist=None, tol=None):
    """Classify how the run ended.

    Returns:
        Dict with ``kind``, the attaining ``index`` and ``value`` for finite
        attainment, and a Cauchy ``tail_bound`` for vanishing steps. The
        tail bound extrapolates the last same-parity ratio geometrically; it
        is reported with ``tail_scope`` as an estimate and does not gate the
        classification, which rests on the last step being within ``tol``.
    """
    tol = resolve(tol, "SETCLASH_TOL")
    dist = _distance_between(trace.a_set, trace.b_set, dist)
    steps = trace.step_norms
    report = {
        "kind": TerminationKind.UNDETERMINED,
        "index": None,
        "value": None,
        "tail_bound": None,
        "tail_scope": None,
        "dist": dist,
    }
    if dist > tol:
        hits = [k for k, step in enumerate(steps, start=1) if abs(step - dist) <= tol]
    else:
        hits = [k for k, step in enumerate(steps, start=1) if step == 0.0]
    if hits:
        report.update(kind=TerminationKind.FINITE_ATTAINMENT, index=hits[0], value=steps[hits[0] - 1])
    elif dist <= tol and trace.status == TraceStatus.CONVERGED and steps and steps[-1] <= tol:
        _, parity = step_ratios(trace)
        rate = math.sqrt(max(parity[-1], 0.0)) if parity else 1.0
        tail = steps[-1] * rate / (1.0 - rate) if rate < 1.0 else math.inf
        report.update(
            kind=TerminationKind.VANISHING_STEPS, value=steps[-1], tail_bound=tail, tail_scope="geometric estimate"
        )
    logger.info(f"AP termination: {report['kind']}")
    return {**report, "kind": str(report["kind"])}


@dataclass
class DistanceDecreaseReport:
    premise_holds: bool
    vacuous: bool
    samples: int
    admissible: int
    dist: float
    bound: float
    conclusion_holds: bool
    witness: np.ndarray = None
    witness_value: float = None

    @property
    def consistent(self):
        """False when the sampled premise held but the conclusion failed."""
        return not (self.premise_holds and not self.conclusion_holds)

    def as_dict(self):
        return {
            "premise_holds": self.premise_holds,
            "vacuous": self.vacuous,
            "samples": self.samples,
            "admissible": self.admissible,
            "dist": self.dist,
            "bound": self.bound,
            "conclusion_holds": self.conclusion_holds,
            "consistent": self.consistent,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_value": self.witness_value,
            "scope": "sampled premise",
        }


def distance_decrease_bound(a_set, xbar, b, q, delta, lam, count=DEFAULT_PAIR_SAMPLES, seed=0, tol=None):
    """Sampled test of the distance decrease ``d^q(b, A) <= ||b - xbar||^q - q lam delta``.

    The premise asks ``||b - a||^(q-2) d(b - a, N_A(a)) >= delta`` for every
    ``a`` in ``A`` with ``||a - xbar|| < lam`` and
    ``||b - a||^q < d^q(b, A) + q lam delta``. Sampled points violating it
    are returned as a witness; the conclusion is always evaluated directly.

    Raises:
        PreconditionError: ``b`` in A or ``xbar`` outside A.
    """
    tol = resolve(tol, "SETCLASH_TOL")
    xbar, b = np.asarray(xbar, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if not a_set.contains(xbar, tol):
        raise PreconditionError("xbar must lie in A", tag="C5.3")
    if a_set.contains(b, tol):
        raise PreconditionError("b must lie outside A", tag="C5.3")
    dist = a_set.dist(b)
    window = dist**q + q * lam * delta
    rng = np.random.default_rng(seed)
    points = sample_set(a_set, rng, count, Region(xbar, lam))
    points = np.vstack([xbar[None, :], points])
    admissible, witness, witness_value = 0, None, None
    for a in points:
        if not np.linalg.norm(a - xbar) < lam:
            continue
        gap = float(np.linalg.norm(b - a))
        if not gap**q < window:
            continue
        admissible += 1
        value = gap ** (q - 2.0) * a_set.normal_cone_dist(a, b - a, tol)
        if value < delta and (witness_value is None or value < witness_value):
            witness, witness_value = a, value
    bound = float(np.linalg.norm(b - xbar)) ** q - q * lam * delta
    report = DistanceDecreaseReport(
        premise_holds=witness is None,
        vacuous=admissible == 0,
        samples=len(points),
        admissible=admissible,
        dist=dist,
        bound=bound,
        conclusion_holds=dist**q <= bound + tol,
    )
    report.witness, report.witness_value = witness, witness_value
    if not report.consistent:
        logger.warning("Sampled premise held but the distance decrease failed; sampling missed a counterexample")
    return report
