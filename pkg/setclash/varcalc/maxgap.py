"""The max-gap function ``f(u) = max_{i<n} ||u_i - a_i - u_n||`` and its
subdifferential."""

from dataclasses import dataclass
import logging

import numpy as np
from django.core.exceptions import ValidationError

from common.exceptions import DimensionMismatch, PreconditionError
from core.vectors import as_tuple, unflatten

logger = logging.getLogger(__name__)

ACTIVE_RTOL = 1e-9


@dataclass(frozen=True)
class MaxGapInstance:
    """Shifts ``a_1, ..., a_{n-1}`` of an ``n``-set max-gap function."""

    shifts: tuple

    def __post_init__(self):
        if len(self.shifts) < 1:
            raise ValidationError("A max-gap instance needs at least two sets (one shift)")
        object.__setattr__(self, "shifts", as_tuple(self.shifts))

    @property
    def n(self):
        return len(self.shifts) + 1

    @property
    def dim(self):
        return self.shifts[0].size

    def residuals(self, u):
        """Rows ``v_i = u_i - a_i - u_n`` for ``i < n``."""
        u = as_tuple(u, count=self.n)
        if u[0].size != self.dim:
            raise DimensionMismatch(f"Points have dimension {u[0].size}, shifts {self.dim}")
        return np.array([u[i] - self.shifts[i] - u[-1] for i in range(self.n - 1)])

    def evaluate(self, u):
        return float(np.linalg.norm(self.residuals(u), axis=1).max())

    def flat_function(self, gauge=None):
        """``phi(f(u))`` as a function of the flattened tuple."""
        n, shifts = self.n, np.array(self.shifts)

        def value(flat):
            blocks = np.reshape(flat, (n, -1))
            gap = float(np.linalg.norm(blocks[:-1] - shifts - blocks[-1], axis=1).max())
            return gap if gauge is None else gauge.value(gap)

        return value

    def split(self, flat):
        return unflatten(flat, self.n)


def maxgap_eval(inst, u):
    return inst.evaluate(u)


def active_indices(inst, u, rtol=ACTIVE_RTOL):
    lengths = np.linalg.norm(inst.residuals(u), axis=1)
    peak = lengths.max()
    return [i for i, length in enumerate(lengths) if length >= peak * (1.0 - rtol)]


def maxgap_subdiff(inst, u, weights=None, tol=1e-9):
    """Build a subgradient ``(x_1*, ..., x_n*)`` of the max-gap function at ``u``.

    Args:
        inst: MaxGapInstance.
        u: Tuple of ``n`` points.
        weights: Nonnegative weights over the ``n - 1`` gaps, supported on
            the active ones and summing to one. Uniform over active gaps
            when omitted.
        tol: Tolerance on the support and sum conditions.

    Returns:
        Tuple of ``n`` arrays with ``x_i* = w_i v_i / ||v_i||`` and
        ``x_n* = -sum_{i<n} x_i*``.

    Raises:
        PreconditionError: The max gap is zero.
        ValidationError: Weights are negative, off the active set or do not
            sum to one.
    """
    rows = inst.residuals(u)
    lengths = np.linalg.norm(rows, axis=1)
    if lengths.max() <= 0.0:
        raise PreconditionError("Max-gap subdifferential needs a positive gap", tag="L6-2")
    active = active_indices(inst, u)
    if weights is None:
        weights = np.zeros(inst.n - 1)
        weights[active] = 1.0 / len(active)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (inst.n - 1,):
        raise ValidationError(f"Expected {inst.n - 1} weights, got {weights.shape}")
    if np.any(weights < -tol):
        raise ValidationError("Subdifferential weights must be nonnegative")
    inactive = [i for i in range(inst.n - 1) if i not in active]
    if inactive and np.max(weights[inactive]) > tol:
        raise ValidationError(f"Weights put mass on inactive gaps {inactive}")
    if abs(weights.sum() - 1.0) > tol:
        raise ValidationError(f"Weights must sum to 1, got {weights.sum()}")
    duals = []
    for i in range(inst.n - 1):
        if i in active and weights[i] > 0:
            duals.append(weights[i] * rows[i] / lengths[i])
        else:
            duals.append(np.zeros(inst.dim))
    duals.append(-np.sum(duals, axis=0))
    return tuple(duals)


def subdiff_conditions(inst, u, duals):
    """Residuals of the three subgradient conditions.

    Returns a dict with ``sum`` (norm of the sum of all duals),
    ``normalization`` (sum of the first ``n - 1`` dual norms minus one) and
    ``support`` (pairing with the gaps minus the max gap).
    """
    rows = inst.residuals(u)
    duals = as_tuple(duals, count=inst.n)
    return {
        "sum": float(np.linalg.norm(np.sum(duals, axis=0))),
        "normalization": float(sum(np.linalg.norm(x) for x in duals[:-1]) - 1.0),
        "support": float(sum(np.dot(x, row) for x, row in zip(duals[:-1], rows)) - np.linalg.norm(rows, axis=1).max()),
    }
