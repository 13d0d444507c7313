"""Search regions, lattices and seeded point samplers over sets."""

from dataclasses import dataclass
from itertools import product
import math

import numpy as np
from django.core.exceptions import ValidationError

from core.vectors import as_vector


@dataclass(frozen=True)
class Region:
    """Closed ball used to bound grid searches and samplers."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValidationError(f"Region radius must be positive, got {self.radius}")

    @property
    def dim(self):
        return self.center.size

    @classmethod
    def from_dict(cls, data):
        return cls(data["center"], float(data["radius"]))

    @classmethod
    def around(cls, boxes, inflate=2.0):
        """Smallest ball containing the given boxes, with radius times ``inflate``."""
        lo = np.min([box[0] for box in boxes], axis=0)
        hi = np.max([box[1] for box in boxes], axis=0)
        center = (lo + hi) / 2.0
        radius = max(float(np.linalg.norm(hi - lo)) / 2.0, 0.5)
        return cls(center, radius * inflate)

    def to_dict(self):
        return {"center": self.center.tolist(), "radius": self.radius}

    def lattice(self, h):
        """Lattice points ``center + h * k`` covering the ball.

        The lattice spans the bounding cube, so every point of the ball is
        within ``h * sqrt(dim) / 2`` of a lattice point.
        """
        if not h > 0:
            raise ValidationError(f"Grid step must be positive, got {h}")
        steps = int(math.ceil(self.radius / h))
        axis = np.arange(-steps, steps + 1) * h
        mesh = np.array(list(product(axis, repeat=self.dim)))
        keep = np.linalg.norm(mesh, axis=1) <= self.radius + h * math.sqrt(self.dim)
        return self.center + mesh[keep]

    def sample(self, rng, count):
        """Uniform samples from the ball."""
        directions = rng.standard_normal((count, self.dim))
        directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-300)
        radii = self.radius * rng.uniform(0.0, 1.0, count) ** (1.0 / self.dim)
        return self.center + directions * radii[:, None]


def box_lattice(lo, hi, h):
    """Lattice with step ``h`` covering the box ``[lo, hi]``."""
    if not h > 0:
        raise ValidationError(f"Grid step must be positive, got {h}")
    axes = [np.arange(a, b + h, h) for a, b in zip(lo, hi)]
    return np.array(list(product(*axes)))


def sample_set(s, rng, count, region):
    """Points of ``s`` obtained by projecting uniform region samples.

    Projection concentrates samples on the boundary of ``s`` facing the
    region, where the normal-cone conditions are informative.
    """
    return s.project_many(region.sample(rng, count))
