"""Constructive Ekeland search on products of projectable sets.

Starting from a point whose value is within ``eps`` of the infimum, the
search repeatedly minimizes ``u -> fn(u) + (eps / lam) d(u, x_k)`` by
projected descent and moves only on strict decrease of that merit. The
accumulated moves then satisfy ``d(x_hat, start) < lam`` and
``fn(x_hat) <= fn(start)`` exactly, while the perturbed-minimality
property of the output is checked on a sample of test points.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from common.conf import resolve
from common.exceptions import PreconditionError
from core.vectors import as_tuple, flatten, unflatten, unit_directions

logger = logging.getLogger(__name__)

MIN_STEP = 1e-13
TEST_RADII = 12


class _Budget:
    def __init__(self, fn, limit):
        self.fn = fn
        self.limit = limit
        self.used = 0

    def __call__(self, point):
        self.used += 1
        return self.fn(point)

    @property
    def exhausted(self):
        return self.used >= self.limit


@dataclass
class EkelandCertificate:
    samples: int
    min_slack: float
    holds: bool
    budget_exhausted: bool

    def as_dict(self):
        return {
            "samples": self.samples,
            "min_slack": self.min_slack,
            "holds": self.holds,
            "budget_exhausted": self.budget_exhausted,
            "scope": "sampled",
        }


@dataclass
class EkelandResult:
    point: tuple
    value: float
    start_value: float
    distance_to_start: float
    iterations: int
    evaluations: int
    certificate: EkelandCertificate
    lam: float
    path: list = field(default_factory=list)

    @property
    def within_radius(self):
        return self.distance_to_start < self.lam

    @property
    def decreased(self):
        return self.value <= self.start_value


class ProductDomain:
    """Product of set descriptors, acting on flattened tuples."""

    def __init__(self, sets, norm=None):
        self.sets = list(sets)
        self.dim = self.sets[0].dim
        self.count = len(self.sets)
        self.norm = norm
        self._metric = norm.flat_distance(self.dim) if norm is not None else None

    def project(self, flat):
        blocks = np.reshape(flat, (self.count, self.dim))
        return np.concatenate([s.project(block) for s, block in zip(self.sets, blocks)])

    def contains(self, flat, tol):
        blocks = np.reshape(flat, (self.count, self.dim))
        return all(s.contains(block, tol) for s, block in zip(self.sets, blocks))

    def metric(self, delta):
        if self._metric is None:
            return float(np.linalg.norm(delta))
        return self._metric(delta)

    @property
    def scale(self):
        """Euclidean length of a unit metric step in the tightest slot."""
        if self.norm is None:
            return 1.0
        return min(self.norm.lam, self.norm.eta)


def _descend(merit, domain, anchor, step, budget, rng):
    """Projected pattern search on ``merit`` starting at ``anchor``."""
    y = anchor.copy()
    best = merit(y)
    size = y.size
    axes = np.vstack([np.eye(size), -np.eye(size)])
    while step > MIN_STEP and not budget.exhausted:
        probe = max(step * 1e-3, 1e-9)
        gradient = np.array([(merit(y + probe * e) - merit(y - probe * e)) / (2 * probe) for e in np.eye(size)])
        directions = [axes, unit_directions(rng, 2 * size, size)]
        length = float(np.linalg.norm(gradient))
        if length > 0.0 and math.isfinite(length):
            directions.insert(0, -gradient[None, :] / length)
        improved = False
        for direction in np.vstack(directions):
            candidate = domain.project(y + step * direction)
            value = merit(candidate)
            if value < best:
                y, best, improved = candidate, value, True
                break
            if budget.exhausted:
                break
        if improved:
            step *= 2.0
        else:
            step /= 2.0
    return y, best


def ekeland_search(
    fn,
    domain,
    start,
    eps,
    lam,
    norm=None,
    inf_estimate=0.0,
    budget=None,
    seed=0,
    tol=1e-9,
    test_samples=256,
):
    """Find ``x_hat`` satisfying the Ekeland conditions relative to ``start``.

    Args:
        fn: Real function of a flat vector (the concatenated tuple).
        domain: List of set descriptors, one per component.
        start: Tuple of component points, each in its set.
        eps: Positive slack with ``fn(start) < inf_estimate + eps``.
        lam: Positive radius of the search in the domain metric.
        norm: ProductNorm inducing the metric (Euclidean when None).
        inf_estimate: Lower estimate of ``inf fn`` over the domain.
        budget: Function evaluation budget (SETCLASH_EKELAND_BUDGET).
        seed: Seed for search directions and test samples.
        tol: Tolerance of the sampled minimality check.
        test_samples: Test points per radius for the sampled check.

    Returns:
        EkelandResult.

    Raises:
        PreconditionError: ``fn(start)`` is not below ``inf_estimate + eps``
            or ``start`` lies outside the domain.
    """
    if not (eps > 0 and lam > 0):
        raise PreconditionError(f"Ekeland search needs eps > 0 and lam > 0, got {eps}, {lam}", tag="ekeland")
    domain = ProductDomain(domain, norm)
    start = as_tuple(start, count=domain.count, dim=domain.dim)
    x0 = flatten(start)
    if not domain.contains(x0, tol):
        raise PreconditionError("Ekeland start point is outside the domain", tag="ekeland")
    counted = _Budget(fn, resolve(budget, "SETCLASH_EKELAND_BUDGET"))
    rng = np.random.default_rng(seed)
    start_value = counted(x0)
    if not start_value < inf_estimate + eps:
        raise PreconditionError(
            f"fn(start)={start_value} is not below inf estimate {inf_estimate} + eps {eps}", tag="ekeland"
        )
    weight = eps / lam
    x, fx = x0, start_value
    path = [x0]
    iterations = 0
    while not counted.exhausted:
        anchor = x

        def merit(u, anchor=anchor):
            return counted(u) + weight * domain.metric(u - anchor)

        y, merit_y = _descend(merit, domain, anchor, 0.5 * lam * domain.scale, counted, rng)
        if not merit_y < fx - 1e-14 * max(1.0, abs(fx)):
            break
        if domain.metric(y - x0) >= lam:
            logger.warning("Ekeland move rejected: it would leave the lam-ball around the start")
            break
        x, fx = y, counted(y)
        path.append(x)
        iterations += 1
    exhausted = counted.exhausted
    if exhausted:
        logger.warning(f"Ekeland search used its budget of {counted.limit} evaluations")

    certificate = _certify(fn, domain, x, fx, weight, lam, path, rng, tol, test_samples, exhausted)
    distance = domain.metric(x - x0)
    logger.info(
        f"Ekeland search: {iterations} moves, {counted.used} evaluations, "
        f"value {start_value:.6g} -> {fx:.6g}, min slack {certificate.min_slack:.3g}"
    )
    result = EkelandResult(
        point=unflatten(x, domain.count),
        value=float(fx),
        start_value=float(start_value),
        distance_to_start=float(distance),
        iterations=iterations,
        evaluations=counted.used,
        certificate=certificate,
        lam=lam,
        path=[unflatten(p, domain.count) for p in path],
    )
    return result


def _certify(fn, domain, x, fx, weight, lam, path, rng, tol, per_radius, exhausted):
    """Sampled check of ``fn(u) + weight * d(u, x) > fn(x) - tol``."""
    tests = []
    scale = domain.scale
    for radius in np.geomspace(1e-6 * lam * scale, 2.0 * lam * scale, TEST_RADII):
        for direction in unit_directions(rng, per_radius // TEST_RADII + 1, x.size):
            tests.append(domain.project(x + radius * direction))
    tests.extend(p for p in path if np.any(p != x))
    min_slack = math.inf
    for u in tests:
        gap = domain.metric(u - x)
        if gap <= 0.0:
            continue
        min_slack = min(min_slack, fn(u) + weight * gap - fx)
    holds = min_slack > -tol
    return EkelandCertificate(len(tests), float(min_slack), bool(holds), bool(exhausted))
