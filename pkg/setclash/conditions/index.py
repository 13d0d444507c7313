"""The nonintersect index and grid-level non-intersection checks.

The index of ``Omega_1, ..., Omega_n`` is
``inf_{u_i in Omega_i} max_{i<n} ||u_n - u_i||``; it is zero when the sets
meet and equals the set distance for two sets.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from django.core.exceptions import ValidationError

from common.conf import resolve
from common.exceptions import UnsupportedMethodError
from sets.descriptors import Ball
from sets.sampling import Region, box_lattice

from .choices import GridOutcome, IndexMethod

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.01
EXACT_MAX_ITER = 100000
EXACT_CUTOFF = 1e-13
REFINE_CYCLES = 2000


def default_method(sets):
    if len(sets) == 2 and all(s.is_convex for s in sets):
        return IndexMethod.EXACT2
    return IndexMethod.GRID


def _exact2(sets, max_iter):
    """Two-set distance and whether it was reached before ``max_iter`` cycles."""
    first, second = sets
    if not (first.is_convex and second.is_convex):
        raise UnsupportedMethodError("exact2 needs two convex sets")
    if isinstance(first, Ball) and isinstance(second, Ball):
        gap = float(np.linalg.norm(first.center - second.center)) - first.radius - second.radius
        return max(gap, 0.0), True
    x = second.project(np.zeros(second.dim))
    for _ in range(max_iter):
        updated = second.project(first.project(x))
        moved = float(np.linalg.norm(updated - x))
        x = updated
        if moved <= EXACT_CUTOFF * max(1.0, float(np.linalg.norm(x))):
            return first.dist(x), True
    logger.warning(f"exact2 index stopped after {max_iter} projection cycles")
    return first.dist(x), False


def _grid(sets, h, box):
    last = sets[-1]
    box = box if box is not None else last.bounds()
    if box is None:
        raise ValidationError("The grid index needs a bounding box for the last set")
    candidates = last.project_many(box_lattice(box[0], box[1], h))
    gaps = np.max([s.dist_many(candidates) for s in sets[:-1]], axis=0)
    return float(gaps.min())


def _cyclic(sets, budget):
    last = sets[-1]
    u_last = last.project(np.zeros(last.dim))
    best = math.inf
    for _ in range(budget):
        others = [s.project(u_last) for s in sets[:-1]]
        best = min(best, max(float(np.linalg.norm(u_last - u)) for u in others))
        updated = last.project(np.mean(others, axis=0))
        if float(np.linalg.norm(updated - u_last)) <= EXACT_CUTOFF:
            break
        u_last = updated
    return best


def _evaluate(sets, method, h, budget, box, max_iter):
    sets = list(sets)
    if len(sets) < 2:
        raise ValidationError("The nonintersect index needs at least two sets")
    method = IndexMethod(method) if method is not None else default_method(sets)
    converged = True
    if method == IndexMethod.EXACT2:
        if len(sets) != 2:
            raise UnsupportedMethodError(f"exact2 handles two sets, got {len(sets)}")
        value, converged = _exact2(sets, max_iter or EXACT_MAX_ITER)
    elif method == IndexMethod.GRID:
        value = _grid(sets, h or DEFAULT_GRID_STEP, box)
    else:
        value = _cyclic(sets, resolve(budget, "SETCLASH_AP_MAX_ITER"))
        logger.info(f"cyclic nonintersect index {value:.6g} is an upper bound")
    logger.debug(f"nonintersect index via {method}: {value:.12g}")
    return method, value, converged


def nonintersect_index(sets, method=None, h=None, budget=None, box=None, max_iter=None):
    """Compute the nonintersect index of ``sets``.

    Args:
        sets: At least two set descriptors; the last one plays the role of
            ``Omega_n``.
        method: ``exact2`` (two convex sets), ``grid`` (lattice oracle with
            accuracy ``h * sqrt(dim) / 2``) or ``cyclic`` (an upper bound).
            Chosen from the sets when omitted.
        h: Grid step for ``grid``.
        budget: Cycle budget for ``cyclic`` (SETCLASH_AP_MAX_ITER).
        box: Bounding box ``(lo, hi)`` of the last set for ``grid``.
        max_iter: Projection cycle cap for ``exact2``. Two balls use the
            closed form and never iterate.

    Raises:
        ValidationError: Fewer than two sets or no bounding box for ``grid``.
        UnsupportedMethodError: ``exact2`` on more than two or nonconvex sets.
    """
    return _evaluate(sets, method, h, budget, box, max_iter)[1]


def index_report(sets, method=None, h=None, budget=None, box=None, max_iter=None):
    """Index with its method; ``converged`` is False when ``exact2`` hit its cycle cap."""
    method, value, converged = _evaluate(sets, method, h, budget, box, max_iter)
    return {
        "index": value,
        "method": str(method),
        "upper_bound": method == IndexMethod.CYCLIC,
        "converged": converged,
    }


@dataclass
class NonintersectionResult:
    outcome: str
    min_gap: float
    threshold: float
    grid_points: int
    region: Region
    witness: np.ndarray = None
    refined_gap: float = None

    def as_dict(self):
        return {
            "outcome": str(self.outcome),
            "min_gap": self.min_gap,
            "threshold": self.threshold,
            "grid_points": self.grid_points,
            "region": self.region.to_dict(),
            "witness": None if self.witness is None else self.witness.tolist(),
            "refined_gap": self.refined_gap,
            "scope": "within region",
        }


def _refine(sets, x):
    """Cyclic projections from ``x``; returns the mean of the last cycle."""
    for _ in range(REFINE_CYCLES):
        visited = []
        current = x
        for s in sets:
            current = s.project(current)
            visited.append(current)
        moved = float(np.linalg.norm(current - x))
        x = current
        if moved <= 1e-14:
            break
    return np.mean(visited, axis=0)


def check_nonintersection(coll, region=None, h=0.1, tol=None):
    """Grid certification of ``cap_i (Omega_i - a_i) = empty`` inside ``region``.

    Every lattice point ``x`` gets the score ``max_i d(x, Omega_i - a_i)``.
    A minimum score above ``h * sqrt(dim)`` certifies disjointness inside the
    region. Otherwise the best point is refined by cyclic projections and
    reported as an intersection witness when its score drops to
    ``max(tol, 1e-3 h)``.

    Raises:
        ValidationError: ``h <= 0`` or no region for unbounded sets.
    """
    if not h > 0:
        raise ValidationError(f"Grid step must be positive, got {h}")
    tol = resolve(tol, "SETCLASH_TOL")
    sets = coll.translated_sets()
    if region is None:
        boxes = coll.bounded_boxes(sets)
        if not boxes:
            raise ValidationError("A search region is required when every set is unbounded")
        region = Region.around(boxes)
    points = region.lattice(h)
    scores = np.max([s.dist_many(points) for s in sets], axis=0)
    # Lowest score first, ties broken towards the region centre.
    best = int(np.lexsort((np.linalg.norm(points - region.center, axis=1), scores))[0])
    min_gap = float(scores[best])
    threshold = h * math.sqrt(coll.dim)
    result = NonintersectionResult(GridOutcome.INCONCLUSIVE, min_gap, threshold, len(points), region)
    if min_gap > threshold:
        result.outcome = GridOutcome.CERTIFIED_DISJOINT
    else:
        refined = _refine(sets, points[best])
        result.refined_gap = max(s.dist(refined) for s in sets)
        if result.refined_gap <= max(tol, 1e-3 * h):
            result.outcome = GridOutcome.WITNESS
            result.witness = refined
    logger.info(
        f"Non-intersection check over {len(points)} grid points: {result.outcome} "
        f"(min gap {min_gap:.4g}, threshold {threshold:.4g})"
    )
    return result
