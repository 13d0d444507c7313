"""Grid evidence for extremality and stationarity of a collection at ``x_bar``.

For each tested ``eps`` the probe looks for small shifts that empty the
intersection of the translated sets, globally (extremal), inside a fixed
ball around ``x_bar`` (locally extremal), inside balls shrinking with
``eps`` (stationary) and around nearby points ``omega_i`` of the sets
(approximately stationary). A find is certified by
:func:`check_nonintersection` up to the grid step. Not finding a witness is
evidence against the property, never a proof.
"""

import logging

import numpy as np
from django.core.exceptions import ValidationError

from common.conf import get_setting
from common.exceptions import PreconditionError
from core.vectors import unit_directions
from sets.sampling import Region, sample_set

from .choices import ExtremalProperty, GridOutcome
from .collection import Collection
from .index import check_nonintersection

logger = logging.getLogger(__name__)

SHIFT_FRACTION = 0.9
STATIONARY_RADII = (0.5, 0.25)
CAVEAT = "Grid non-discovery is evidence, not proof, that a property fails."


def _shift_directions(dim, count, seed):
    axes = np.eye(dim)
    rng = np.random.default_rng(seed)
    return np.vstack([axes, -axes, unit_directions(rng, count, dim)])


def _shift_candidates(n, directions, radius):
    """Shift tuples of norm ``radius``: one moved set, then all but the last."""
    dim = directions.shape[1]
    for u in directions:
        for i in range(n - 1):
            shifts = [np.zeros(dim) for _ in range(n - 1)]
            shifts[i] = radius * u
            yield shifts
        if n > 2:
            yield [radius * u for _ in range(n - 1)]


def _search(sets, directions, radius, region, h, base_points=None):
    """First shift tuple certified to empty the intersection inside ``region``."""
    step = min(h, radius / 4.0)
    for shifts in _shift_candidates(len(sets), directions, radius):
        if base_points is None:
            coll = Collection(sets, shifts=shifts)
        else:
            offsets = list(base_points)
            moved = [w + a for w, a in zip(offsets[:-1], shifts)] + [offsets[-1]]
            coll = Collection(sets, shifts=moved)
        result = check_nonintersection(coll, region=region, h=step)
        if result.outcome == GridOutcome.CERTIFIED_DISJOINT:
            return {
                "shifts": [a.tolist() for a in coll.shifts],
                "region": region.to_dict(),
                "grid_step": step,
                "min_gap": result.min_gap,
            }
    return None


def _nearby_tuples(sets, xbar, eps, samples, rng):
    """``x_bar`` repeated, then sampled tuples with ``omega_i`` in ``Omega_i`` and ``||omega_i - x_bar|| < eps``."""
    tuples = [[xbar.copy() for _ in sets]]
    ball = Region(xbar, eps)
    drawn = [sample_set(s, rng, 4 * samples, ball) for s in sets]
    for k in range(4 * samples):
        candidate = [points[k] for points in drawn]
        if all(np.linalg.norm(w - xbar) < eps for w in candidate):
            tuples.append(candidate)
        if len(tuples) > samples:
            break
    return tuples


def probe_at_epsilon(coll, eps, region, h, rho, directions=8, samples=4, seed=0):
    """Evidence for every property at a single ``eps``.

    Returns:
        JSON-ready dict with ``found`` and ``witness`` per property.
    """
    xbar = coll.common_point
    sets = coll.sets
    vectors = _shift_directions(coll.dim, directions, seed)
    found = {}

    found[ExtremalProperty.EXTREMAL] = _search(sets, vectors, SHIFT_FRACTION * eps, region, h)
    found[ExtremalProperty.LOCALLY_EXTREMAL] = _search(
        sets, vectors, SHIFT_FRACTION * eps, Region(xbar, rho), h
    )

    stationary = None
    for fraction in STATIONARY_RADII:
        radius = fraction * eps
        stationary = _search(sets, vectors, SHIFT_FRACTION * eps * radius, Region(xbar, radius), h)
        if stationary is not None:
            stationary["rho"] = radius
            break
    found[ExtremalProperty.STATIONARY] = stationary

    approximate = None
    rng = np.random.default_rng(seed)
    for omegas in _nearby_tuples(sets, xbar, eps, samples, rng):
        for fraction in STATIONARY_RADII:
            radius = fraction * eps
            approximate = _search(
                sets, vectors, SHIFT_FRACTION * eps * radius, Region(np.zeros(coll.dim), radius), h,
                base_points=omegas,
            )
            if approximate is not None:
                approximate.update(rho=radius, omegas=[w.tolist() for w in omegas])
                break
        if approximate is not None:
            break
    found[ExtremalProperty.APPROXIMATELY_STATIONARY] = approximate

    logger.debug(f"probe eps={eps}: " + ", ".join(f"{k}={v is not None}" for k, v in found.items()))
    return {
        "eps": eps,
        "properties": {str(k): {"found": v is not None, "witness": v} for k, v in found.items()},
    }


def _default_region(coll):
    boxes = coll.bounded_boxes()
    if not boxes:
        raise ValidationError("The stationarity probe needs a region when every set is unbounded")
    return Region.around(boxes)


def stationarity_probe(coll, eps_list, region=None, h=0.05, rho=None, directions=8, samples=4, seed=0):
    """Search translation grids for extremality and stationarity witnesses.

    Args:
        coll: Collection with a common point ``x_bar``.
        eps_list: Decreasing positive values of ``eps`` to test.
        region: Search ball for the global (extremal) property; required
            when every set is unbounded.
        h: Largest grid step of the non-intersection checks.
        rho: Radius of the locally extremal test (region radius by default).
        directions: Random shift directions added to the coordinate axes.
        samples: Sampled ``omega`` tuples for approximate stationarity.
        seed: Seed for directions and samples.

    Returns:
        Report with one entry per ``eps``, a per-property summary
        (``True`` when a witness was found for every ``eps``) and a caveat.

    Raises:
        PreconditionError: No common point.
        ValidationError: Bad ``eps_list`` or no region for unbounded sets.
    """
    from .tasks import probe_epsilon

    if coll.common_point is None:
        raise PreconditionError("The stationarity probe needs a common point", tag="common-point")
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0 for e in eps_list) or any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise ValidationError(f"eps_list must be positive and strictly decreasing, got {eps_list}")
    region = region or _default_region(coll)
    rho = rho or region.radius
    payloads = [
        {
            "collection": coll.to_dict(),
            "eps": eps,
            "region": region.to_dict(),
            "h": h,
            "rho": rho,
            "directions": directions,
            "samples": samples,
            "seed": seed,
        }
        for eps in eps_list
    ]
    if get_setting("SETCLASH_PROBE_ASYNC"):
        from celery import group

        results = group(probe_epsilon.s(payload) for payload in payloads).apply_async().get()
    else:
        results = [probe_epsilon(payload) for payload in payloads]
    results.sort(key=lambda item: -item["eps"])

    summary = {
        str(prop): all(item["properties"][str(prop)]["found"] for item in results) for prop in ExtremalProperty
    }
    logger.info(f"Stationarity probe over {len(results)} values of eps: {summary}")
    return {
        "common_point": coll.common_point.tolist(),
        "region": region.to_dict(),
        "rho": rho,
        "results": results,
        "summary": summary,
        "caveat": CAVEAT,
    }
