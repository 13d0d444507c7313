"""Sampled slopes and the slope chain rule.

The slope of ``fn`` at ``x`` is ``limsup_{u -> x} [fn(x) - fn(u)]_+ / d(x, u)``
and the nonlocal slope replaces the limit by a supremum over all ``u``
with ``fn(u)`` clamped at zero. Both are estimated from seeded samples, so
every estimate is a lower bound of the true quantity.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from common.conf import resolve
from common.exceptions import DomainError
from core.vectors import unit_directions

logger = logging.getLogger(__name__)

NONLOCAL_RADII = (1.0, 10.0, 100.0)


@dataclass
class SlopeEstimate:
    value: float
    radius_used: float
    samples: int
    history: list = field(default_factory=list)

    def as_dict(self):
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "radius_used": self.radius_used,
            "samples": self.samples,
            "history": self.history,
        }


def _euclidean(delta):
    return float(np.linalg.norm(delta))


def _identity(point):
    return point


def _candidates(x, radius, rng, budget):
    directions = unit_directions(rng, budget, x.size)
    axes = np.eye(x.size)
    directions = np.vstack([directions, axes, -axes])
    return x + radius * directions


def _radius_maxima(fn, x, fx, radii, budget, rng, metric, project, clamp):
    maxima, samples = [], 0
    for radius in radii:
        best = 0.0
        for u in _candidates(x, radius, rng, budget):
            u = project(u)
            gap = metric(u - x)
            if gap <= 0.0:
                continue
            fu = fn(u)
            if clamp:
                fu = max(fu, 0.0)
            samples += 1
            best = max(best, (fx - fu) / gap)
        maxima.append(best)
    return maxima, samples


def local_slope(fn, x, radii=None, budget=None, seed=0, metric=None, project=None):
    """Estimate the slope of ``fn`` at ``x``.

    Args:
        fn: Real function of a flat numpy vector.
        x: Base point.
        radii: Decreasing positive radii; defaults to SETCLASH_SLOPE_RADII.
        budget: Random directions per radius (coordinate axes are added).
        seed: Seed for the direction sampler.
        metric: Length of a displacement; Euclidean by default.
        project: Map onto the domain of ``fn`` (identity by default).

    Returns:
        SlopeEstimate whose value is the largest descent ratio seen at the
        smallest radius; ``history`` holds the running value at each radius,
        nonincreasing as the radius shrinks.
    """
    x = np.asarray(x, dtype=np.float64)
    radii = sorted(resolve(radii, "SETCLASH_SLOPE_RADII"), reverse=True)
    budget = resolve(budget, "SETCLASH_SLOPE_DIRECTIONS")
    fx = fn(x)
    if not math.isfinite(fx):
        return SlopeEstimate(math.inf, radii[-1], 0, [math.inf] * len(radii))
    rng = np.random.default_rng(seed)
    maxima, samples = _radius_maxima(
        fn, x, fx, radii, budget, rng, metric or _euclidean, project or _identity, clamp=False
    )
    # Running max over the radii at or below each radius.
    history = list(np.maximum.accumulate(maxima[::-1])[::-1])
    return SlopeEstimate(float(maxima[-1]), radii[-1], samples, [float(h) for h in history])


def nonlocal_slope(fn, x, budget=None, seed=0, radii=None, metric=None, project=None, extra_points=()):
    """Estimate the nonlocal slope of ``fn`` at ``x``.

    The local sample set (same seed and radii) is reused and extended by
    larger radii and by ``extra_points``, so for nonnegative ``fn`` the
    result is never below :func:`local_slope` at equal seeds.
    """
    x = np.asarray(x, dtype=np.float64)
    radii = sorted(resolve(radii, "SETCLASH_SLOPE_RADII"), reverse=True)
    budget = resolve(budget, "SETCLASH_SLOPE_DIRECTIONS")
    metric = metric or _euclidean
    project = project or _identity
    fx = fn(x)
    if not math.isfinite(fx):
        return SlopeEstimate(math.inf, math.inf, 0, [])
    rng = np.random.default_rng(seed)
    maxima, samples = _radius_maxima(fn, x, fx, radii, budget, rng, metric, project, clamp=True)
    wide, wide_samples = _radius_maxima(fn, x, fx, NONLOCAL_RADII, budget, rng, metric, project, clamp=True)
    best = max(maxima + wide)
    for point in extra_points:
        u = project(np.asarray(point, dtype=np.float64))
        gap = metric(u - x)
        if gap > 0.0:
            best = max(best, (fx - max(fn(u), 0.0)) / gap)
            samples += 1
    return SlopeEstimate(float(max(best, 0.0)), math.inf, samples + wide_samples, [float(m) for m in maxima + wide])


def chain_rule_slope(g, psi_value, psi_slope):
    """Slope of ``g(psi)`` from the slope of ``psi``: ``g'(psi(x)) * |grad psi|(x)``.

    Uses the convention ``0 * inf = 0``.

    Raises:
        DomainError: ``psi_value < 0`` or ``g`` is not differentiable there.
    """
    derivative = g.derivative(psi_value)
    if math.isnan(derivative):
        raise DomainError(f"Gauge is not differentiable at {psi_value}")
    if derivative == 0.0 or psi_slope == 0.0:
        return 0.0
    return derivative * psi_slope
