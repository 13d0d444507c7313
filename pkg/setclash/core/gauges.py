"""Gauge functions: continuous, strictly increasing reparameterizations of a
gap with ``phi(0) = 0``.

Three kinds are supported. The Hölder family ``phi(t) = t**q / alpha`` has
closed forms for value, derivative and inverse; custom gauges wrap caller
functions and fall back to bracketed root finding for the inverse.
"""

import logging
import math

import numpy as np
from django.core.exceptions import ValidationError
from scipy import optimize

from common.exceptions import DomainError

from .choices import GaugeKind

logger = logging.getLogger(__name__)

# Grid used to validate custom gauges at construction.
VALIDATION_GRID = np.logspace(-6, 6, 1000)


class Gauge:
    """A gauge ``phi`` with derivative and inverse.

    Use the :meth:`identity`, :meth:`holder` and :meth:`custom` constructors.
    """

    def __init__(self, kind, q=1.0, alpha=1.0, value_fn=None, derivative_fn=None, inverse_fn=None):
        self.kind = GaugeKind(kind)
        self.q = float(q)
        self.alpha = float(alpha)
        self._value_fn = value_fn
        self._derivative_fn = derivative_fn
        self._inverse_fn = inverse_fn

    @classmethod
    def identity(cls):
        return cls(GaugeKind.IDENTITY)

    @classmethod
    def holder(cls, q, alpha=1.0):
        if not (q > 0 and alpha > 0):
            raise ValidationError(f"Hölder gauge needs q > 0 and alpha > 0, got q={q}, alpha={alpha}")
        return cls(GaugeKind.HOLDER, q=q, alpha=alpha)

    @classmethod
    def custom(cls, value_fn, derivative_fn, inverse_fn=None):
        """Wrap caller functions after checking them on a log grid.

        Raises:
            ValidationError: ``phi(0) != 0``, non-increasing samples or a
                non-positive derivative sample.
        """
        if abs(float(value_fn(0.0))) > 1e-12:
            raise ValidationError("Custom gauge must satisfy phi(0) = 0")
        values = np.array([float(value_fn(t)) for t in VALIDATION_GRID])
        if not np.all(np.isfinite(values)) or np.any(np.diff(values) <= 0):
            raise ValidationError("Custom gauge is not strictly increasing on the validation grid")
        slopes = np.array([float(derivative_fn(t)) for t in VALIDATION_GRID])
        if np.any(~(slopes > 0)):
            raise ValidationError("Custom gauge derivative must be positive for t > 0")
        return cls(GaugeKind.CUSTOM, value_fn=value_fn, derivative_fn=derivative_fn, inverse_fn=inverse_fn)

    @classmethod
    def from_dict(cls, data):
        kind = GaugeKind(data.get("kind", GaugeKind.IDENTITY))
        if kind == GaugeKind.IDENTITY:
            return cls.identity()
        if kind == GaugeKind.HOLDER:
            return cls.holder(data.get("q", 1.0), data.get("alpha", 1.0))
        raise ValidationError("Custom gauges cannot be described in JSON")

    def to_dict(self):
        data = {"kind": str(self.kind)}
        if self.kind == GaugeKind.HOLDER:
            data.update(q=self.q, alpha=self.alpha)
        return data

    def __repr__(self):
        if self.kind == GaugeKind.HOLDER:
            return f"Gauge(holder, q={self.q}, alpha={self.alpha})"
        return f"Gauge({self.kind})"

    @staticmethod
    def _check_domain(t):
        t = float(t)
        if not t >= 0:
            raise DomainError(f"Gauge argument must be nonnegative, got {t}")
        return t

    def value(self, t):
        t = self._check_domain(t)
        if self.kind == GaugeKind.IDENTITY:
            return t
        if self.kind == GaugeKind.HOLDER:
            return t**self.q / self.alpha
        return float(self._value_fn(t))

    def derivative(self, t):
        """``phi'(t)``; at ``t = 0`` the one-sided value, possibly ``inf``."""
        t = self._check_domain(t)
        if self.kind == GaugeKind.IDENTITY:
            return 1.0
        if self.kind == GaugeKind.HOLDER:
            if t == 0.0:
                if self.q < 1:
                    return math.inf
                return 1.0 / self.alpha if self.q == 1 else 0.0
            return self.q / self.alpha * t ** (self.q - 1)
        return float(self._derivative_fn(t))

    def is_differentiable_at(self, t):
        return math.isfinite(self.derivative(t))

    def inverse(self, s):
        s = self._check_domain(s)
        if self.kind == GaugeKind.IDENTITY:
            return s
        if self.kind == GaugeKind.HOLDER:
            return (self.alpha * s) ** (1.0 / self.q)
        if self._inverse_fn is not None:
            return float(self._inverse_fn(s))
        return self._bracketed_inverse(s)

    def _bracketed_inverse(self, s):
        if s == 0.0:
            return 0.0
        upper = 1.0
        while self.value(upper) < s:
            upper *= 2.0
            if upper > 1e300:
                raise DomainError(f"Custom gauge never reaches {s}")
        return float(optimize.brentq(lambda t: self.value(t) - s, 0.0, upper, xtol=1e-14, rtol=1e-15))


def gauge_eval_suite(gauge, t):
    """Return ``(phi(t), phi'(t), phi^{-1}(t))``."""
    return gauge.value(t), gauge.derivative(t), gauge.inverse(t)
