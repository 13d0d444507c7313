"""Collections of closed sets together with their translation data."""

from dataclasses import dataclass
import logging

import numpy as np
from django.core.exceptions import ValidationError

from common.exceptions import DimensionMismatch
from core.vectors import as_tuple, as_vector
from sets.descriptors import DEFAULT_TOL, Translate
from sets.serializers import descriptor_from_dict, descriptor_to_dict

logger = logging.getLogger(__name__)


def asymmetric_reduce(shifts, base_points=None):
    """Rewrite translation data in the asymmetric ``n - 1`` shift form.

    Without ``base_points``, ``n`` symmetric shifts become ``a_i - a_n``
    (``i < n``): the translated sets intersect exactly when the reduced
    ones do. With ``n`` base points ``w_i`` and ``n - 1`` shifts, the
    recentred shifts ``a_i + w_i - w_n`` are returned.

    Raises:
        ValidationError: Fewer than two sets described, or counts that do
            not match the mode.
    """
    if base_points is None:
        shifts = as_tuple(shifts)
        if len(shifts) < 2:
            raise ValidationError("Symmetric shifts need at least two sets")
        return tuple(a - shifts[-1] for a in shifts[:-1])
    base_points = as_tuple(base_points)
    if len(base_points) < 2:
        raise ValidationError("Recentring needs at least two base points")
    shifts = as_tuple(shifts, dim=base_points[0].size)
    if len(shifts) != len(base_points) - 1:
        raise ValidationError(f"Expected {len(base_points) - 1} shifts for {len(base_points)} base points, got {len(shifts)}")
    return tuple(a + w - base_points[-1] for a, w in zip(shifts, base_points[:-1]))


def recentre(sets, points):
    """The sets ``Omega_i - w_i``, which share the origin when ``w_i`` is in ``Omega_i``."""
    return [Translate(s, w) for s, w in zip(sets, points)]


@dataclass
class Collection:
    """``n >= 2`` closed sets with optional shifts, common point and base points.

    ``shifts`` holds either ``n - 1`` vectors (asymmetric form, the last set
    stays fixed) or ``n`` vectors (symmetric form).
    """

    sets: list
    shifts: tuple = None
    common_point: np.ndarray = None
    base_points: tuple = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        self.sets = list(self.sets)
        if len(self.sets) < 2:
            raise ValidationError(f"A collection needs at least two sets, got {len(self.sets)}")
        dims = {s.dim for s in self.sets}
        if len(dims) != 1:
            raise DimensionMismatch(f"Sets of a collection must share a dimension, got {sorted(dims)}")
        if self.shifts is not None:
            self.shifts = as_tuple(self.shifts, dim=self.dim)
            if len(self.shifts) not in (self.n - 1, self.n):
                raise ValidationError(f"Expected {self.n - 1} or {self.n} shifts, got {len(self.shifts)}")
        if self.common_point is not None:
            self.common_point = as_vector(self.common_point, self.dim)
            for index, s in enumerate(self.sets):
                if not s.contains(self.common_point, self.tol):
                    raise ValidationError(
                        f"Common point is {s.dist(self.common_point):.3e} away from set {index}"
                    )
        if self.base_points is not None:
            self.base_points = as_tuple(self.base_points, count=self.n, dim=self.dim)
            for index, (s, point) in enumerate(zip(self.sets, self.base_points)):
                if not s.contains(point, self.tol):
                    raise ValidationError(f"Base point {index} is {s.dist(point):.3e} away from its set")

    @property
    def n(self):
        return len(self.sets)

    @property
    def dim(self):
        return self.sets[0].dim

    @property
    def is_symmetric(self):
        return self.shifts is not None and len(self.shifts) == self.n

    def asymmetric_shifts(self):
        if self.shifts is None:
            return tuple(np.zeros(self.dim) for _ in range(self.n - 1))
        if self.is_symmetric:
            return asymmetric_reduce(self.shifts)
        return self.shifts

    def symmetric_shifts(self):
        if self.shifts is None:
            return tuple(np.zeros(self.dim) for _ in range(self.n))
        if self.is_symmetric:
            return self.shifts
        return self.shifts + (np.zeros(self.dim),)

    def translated_sets(self):
        """``Omega_i - a_i`` for every shifted set, in the stored form."""
        if self.is_symmetric:
            return [Translate(s, a) for s, a in zip(self.sets, self.shifts)]
        shifts = self.asymmetric_shifts()
        return [Translate(s, a) for s, a in zip(self.sets[:-1], shifts)] + [self.sets[-1]]

    def bounded_boxes(self, sets=None):
        boxes = [s.bounds() for s in (sets if sets is not None else self.sets)]
        return [box for box in boxes if box is not None]

    def to_dict(self):
        data = {"sets": [descriptor_to_dict(s) for s in self.sets]}
        if self.shifts is not None:
            data["shifts"] = [a.tolist() for a in self.shifts]
        if self.common_point is not None:
            data["common_point"] = self.common_point.tolist()
        if self.base_points is not None:
            data["base_points"] = [w.tolist() for w in self.base_points]
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(
            sets=[descriptor_from_dict(item) for item in data["sets"]],
            shifts=data.get("shifts"),
            common_point=data.get("common_point"),
            base_points=data.get("base_points"),
        )
