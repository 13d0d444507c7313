"""The parametric max norm on product spaces and its dual sum norm."""

from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from common.exceptions import DimensionMismatch

from .vectors import as_tuple


@dataclass(frozen=True)
class ProductNorm:
    """Norm on ``(R^d)^n`` weighting the first ``n - 1`` slots by ``lam``
    and the last slot by ``eta``::

        ||(u_1, ..., u_n)|| = max(||u_1|| / lam, ..., ||u_{n-1}|| / lam, ||u_n|| / eta)

    The dual norm is ``lam * sum_{i<n} ||x_i*|| + eta * ||x_n*||``.
    """

    lam: float
    eta: float
    n: int

    def __post_init__(self):
        if not (self.lam > 0 and self.eta > 0):
            raise ValidationError(f"ProductNorm needs lam > 0 and eta > 0, got {self.lam}, {self.eta}")
        if self.n < 2:
            raise ValidationError(f"ProductNorm needs at least two slots, got {self.n}")

    def _check(self, parts):
        if len(parts) != self.n:
            raise DimensionMismatch(f"Expected {self.n} components, got {len(parts)}")
        return as_tuple(parts)

    def evaluate(self, parts):
        parts = self._check(parts)
        leading = max(float(np.linalg.norm(part)) for part in parts[:-1]) / self.lam
        return max(leading, float(np.linalg.norm(parts[-1])) / self.eta)

    def dual(self, duals):
        duals = self._check(duals)
        leading = sum(float(np.linalg.norm(part)) for part in duals[:-1])
        return self.lam * leading + self.eta * float(np.linalg.norm(duals[-1]))

    def distance(self, first, second):
        return self.evaluate([np.subtract(a, b) for a, b in zip(first, second)])

    def flat_distance(self, dim):
        """Distance on flattened tuples, for samplers that work on flat arrays."""
        lam, eta, n = self.lam, self.eta, self.n

        def metric(delta):
            blocks = np.reshape(delta, (n, dim))
            lengths = np.linalg.norm(blocks, axis=1)
            return float(max(lengths[:-1].max() / lam, lengths[-1] / eta))

        return metric

    @staticmethod
    def pairing(duals, parts):
        """Sum of component inner products ``sum_i <x_i*, u_i>``."""
        duals = as_tuple(duals)
        parts = as_tuple(parts, count=len(duals), dim=duals[0].size)
        return float(sum(np.dot(x, u) for x, u in zip(duals, parts)))


def product_norm_eval(norm, parts):
    return norm.evaluate(parts)


def dual_product_norm_eval(norm, duals):
    return norm.dual(duals)
