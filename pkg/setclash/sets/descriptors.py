"""Closed set descriptors with projection, distance and normal-cone oracles.

Every descriptor is immutable and describes a nonempty closed subset of
``R^dim``. Convex variants return the unique metric projection; the normal
cone at a point is exposed both as a closed-form distance (where one
exists) and as a finite list of generators, which lets composite variants
combine cones.
"""

from abc import ABC, abstractmethod
from itertools import combinations
import logging

import numpy as np
from django.core.exceptions import ValidationError
from scipy import linalg, optimize

from common.exceptions import PreconditionError, UnsupportedMethodError
from core.vectors import as_vector

from .choices import SetVariant
from .cones import cone_distance

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
POLYTOPE_MAX_DIM = 3
POLYTOPE_MAX_FACETS = 16
RESTRICTION_CUTOFF = 1e-12
RESTRICTION_MAX_ITER = 20000


class SetDescriptor(ABC):
    variant = None
    is_convex = True
    approximate = False

    @property
    @abstractmethod
    def dim(self):
        """Ambient dimension."""

    def project(self, x):
        return self._project(as_vector(x, self.dim))

    def project_many(self, points):
        """Project each row of ``points``."""
        points = np.asarray(points, dtype=np.float64)
        return np.array([self._project(row) for row in points])

    def dist(self, x):
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self._project(x)))

    def dist_many(self, points):
        points = np.asarray(points, dtype=np.float64)
        return np.linalg.norm(points - self.project_many(points), axis=1)

    def contains(self, x, tol=DEFAULT_TOL):
        return self.dist(x) <= tol

    def normal_cone_dist(self, w, v, tol=DEFAULT_TOL):
        """Distance from ``v`` to the normal cone of the set at ``w``.

        Raises:
            PreconditionError: ``w`` is not in the set within ``tol``.
            UnsupportedMethodError: the variant has no computable cone.
        """
        w = as_vector(w, self.dim)
        v = as_vector(v, self.dim)
        if not self.contains(w, tol):
            raise PreconditionError(
                f"Normal cone requested at a point {self.dist(w):.3e} away from the {self.variant} set",
                tag="membership",
            )
        return self._normal_cone_dist(w, v, tol)

    def _normal_cone_dist(self, w, v, tol):
        return cone_distance(v, self.normal_cone_generators(w, tol))

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        """Rows generating the normal cone at ``w`` (empty for ``{0}``)."""
        raise UnsupportedMethodError(f"{self.variant} sets have no finitely generated normal cone")

    def bounds(self):
        """Bounding box ``(lo, hi)``, or None when the set is unbounded."""
        return None

    @abstractmethod
    def _project(self, x):
        ...

    @abstractmethod
    def to_dict(self):
        ...

    def __repr__(self):
        return f"<{type(self).__name__} {self.to_dict()}>"


def _whole_space(dim):
    eye = np.eye(dim)
    return np.vstack([eye, -eye])


def _no_generators(dim):
    return np.zeros((0, dim))


class Halfspace(SetDescriptor):
    """``{x : <normal, x> <= offset}``."""

    variant = SetVariant.HALFSPACE

    def __init__(self, normal, offset):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        self._length = float(np.linalg.norm(self.normal))
        if self._length == 0.0:
            raise ValidationError("Halfspace normal must be nonzero")
        self._unit = self.normal / self._length

    @property
    def dim(self):
        return self.normal.size

    def signed_distance(self, x):
        return (float(np.dot(self.normal, x)) - self.offset) / self._length

    def _project(self, x):
        excess = self.signed_distance(x)
        if excess <= 0.0:
            return x.copy()
        return x - excess * self._unit

    def project_many(self, points):
        points = np.asarray(points, dtype=np.float64)
        excess = np.maximum((points @ self.normal - self.offset) / self._length, 0.0)
        return points - excess[:, None] * self._unit

    def contains(self, x, tol=DEFAULT_TOL):
        return self.signed_distance(as_vector(x, self.dim)) <= tol

    def on_boundary(self, w, tol):
        return self.signed_distance(w) >= -tol

    def _normal_cone_dist(self, w, v, tol):
        if not self.on_boundary(w, tol):
            return float(np.linalg.norm(v))
        along = float(np.dot(v, self._unit))
        if along <= 0.0:
            return float(np.linalg.norm(v))
        return float(np.linalg.norm(v - along * self._unit))

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        if self.on_boundary(w, tol):
            return self.normal[None, :].copy()
        return _no_generators(self.dim)

    def to_dict(self):
        return {"type": str(self.variant), "normal": self.normal.tolist(), "offset": self.offset}


class Hyperplane(SetDescriptor):
    """``{x : <normal, x> = offset}``."""

    variant = SetVariant.HYPERPLANE

    def __init__(self, normal, offset):
        self.normal = as_vector(normal)
        self.offset = float(offset)
        length = float(np.linalg.norm(self.normal))
        if length == 0.0:
            raise ValidationError("Hyperplane normal must be nonzero")
        self._length = length
        self._unit = self.normal / length

    @property
    def dim(self):
        return self.normal.size

    def _project(self, x):
        excess = (float(np.dot(self.normal, x)) - self.offset) / self._length
        return x - excess * self._unit

    def project_many(self, points):
        points = np.asarray(points, dtype=np.float64)
        excess = (points @ self.normal - self.offset) / self._length
        return points - excess[:, None] * self._unit

    def _normal_cone_dist(self, w, v, tol):
        return float(np.linalg.norm(v - np.dot(v, self._unit) * self._unit))

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        return np.vstack([self.normal, -self.normal])

    def to_dict(self):
        return {"type": str(self.variant), "normal": self.normal.tolist(), "offset": self.offset}


class AffineSubspace(SetDescriptor):
    """``point + span(basis)`` with an orthonormal (possibly empty) basis."""

    variant = SetVariant.AFFINE

    def __init__(self, point, basis=()):
        self.point = as_vector(point)
        basis = [as_vector(vector, self.point.size) for vector in basis]
        self.basis = np.array(basis).reshape(len(basis), self.point.size)
        gram = self.basis @ self.basis.T
        if not np.allclose(gram, np.eye(len(basis)), atol=1e-9):
            raise ValidationError("AffineSubspace basis must be orthonormal")

    @property
    def dim(self):
        return self.point.size

    def _project(self, x):
        return self.point + self.basis.T @ (self.basis @ (x - self.point))

    def project_many(self, points):
        offsets = np.asarray(points, dtype=np.float64) - self.point
        return self.point + offsets @ self.basis.T @ self.basis

    def _normal_cone_dist(self, w, v, tol):
        return float(np.linalg.norm(self.basis.T @ (self.basis @ v)))

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        if len(self.basis) == 0:
            return _whole_space(self.dim)
        complement = linalg.null_space(self.basis).T
        return np.vstack([complement, -complement])

    def bounds(self):
        if len(self.basis) == 0:
            return self.point.copy(), self.point.copy()
        return None

    def to_dict(self):
        return {"type": str(self.variant), "point": self.point.tolist(), "basis": self.basis.tolist()}


class Ball(SetDescriptor):
    """Closed Euclidean ball."""

    variant = SetVariant.BALL

    def __init__(self, center, radius):
        self.center = as_vector(center)
        self.radius = float(radius)
        if not self.radius >= 0.0:
            raise ValidationError(f"Ball radius must be nonnegative, got {radius}")

    @property
    def dim(self):
        return self.center.size

    def _project(self, x):
        offset = x - self.center
        length = float(np.linalg.norm(offset))
        if length <= self.radius:
            return x.copy()
        return self.center + offset * (self.radius / length)

    def project_many(self, points):
        offsets = np.asarray(points, dtype=np.float64) - self.center
        lengths = np.linalg.norm(offsets, axis=1)
        scale = np.ones_like(lengths)
        outside = lengths > self.radius
        scale[outside] = self.radius / lengths[outside]
        return self.center + offsets * scale[:, None]

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        offset = w - self.center
        if self.radius <= tol:
            return _whole_space(self.dim)
        if self.radius - float(np.linalg.norm(offset)) > tol:
            return _no_generators(self.dim)
        return offset[None, :]

    def _normal_cone_dist(self, w, v, tol):
        generators = self.normal_cone_generators(w, tol)
        if len(generators) == 0:
            return float(np.linalg.norm(v))
        if len(generators) > 1:
            return 0.0
        unit = generators[0] / np.linalg.norm(generators[0])
        along = float(np.dot(v, unit))
        if along <= 0.0:
            return float(np.linalg.norm(v))
        return float(np.linalg.norm(v - along * unit))

    def bounds(self):
        return self.center - self.radius, self.center + self.radius

    def to_dict(self):
        return {"type": str(self.variant), "center": self.center.tolist(), "radius": self.radius}


class Box(SetDescriptor):
    """Componentwise ``lo <= x <= hi``."""

    variant = SetVariant.BOX

    def __init__(self, lo, hi):
        self.lo = as_vector(lo)
        self.hi = as_vector(hi, self.lo.size)
        if np.any(self.lo > self.hi):
            raise ValidationError("Box needs lo <= hi componentwise")

    @property
    def dim(self):
        return self.lo.size

    def _project(self, x):
        return np.clip(x, self.lo, self.hi)

    def project_many(self, points):
        return np.clip(np.asarray(points, dtype=np.float64), self.lo, self.hi)

    def _faces(self, w, tol):
        return w - self.lo <= tol, self.hi - w <= tol

    def _normal_cone_dist(self, w, v, tol):
        at_lo, at_hi = self._faces(w, tol)
        gaps = np.abs(v)
        gaps = np.where(at_lo & ~at_hi, np.maximum(v, 0.0), gaps)
        gaps = np.where(at_hi & ~at_lo, np.maximum(-v, 0.0), gaps)
        gaps = np.where(at_lo & at_hi, 0.0, gaps)
        return float(np.linalg.norm(gaps))

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        at_lo, at_hi = self._faces(w, tol)
        eye = np.eye(self.dim)
        return np.vstack([-eye[at_lo], eye[at_hi]])

    def bounds(self):
        return self.lo.copy(), self.hi.copy()

    def to_dict(self):
        return {"type": str(self.variant), "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Polytope(SetDescriptor):
    """Bounded intersection of halfspaces in dimension at most 3.

    Vertices are enumerated at construction, which both detects empty
    descriptions and gives the bounding box. Projection enumerates active
    sets of facets and keeps the nearest KKT point.
    """

    variant = SetVariant.POLYTOPE

    def __init__(self, halfspaces):
        halfspaces = [h if isinstance(h, Halfspace) else Halfspace(**h) for h in halfspaces]
        if not halfspaces:
            raise ValidationError("Polytope needs at least one halfspace")
        dim = halfspaces[0].dim
        if dim > POLYTOPE_MAX_DIM or len(halfspaces) > POLYTOPE_MAX_FACETS:
            raise ValidationError(
                f"Polytope limited to dimension {POLYTOPE_MAX_DIM} and {POLYTOPE_MAX_FACETS} facets"
            )
        if any(h.dim != dim for h in halfspaces):
            raise ValidationError("Polytope halfspaces must share a dimension")
        self.halfspaces = halfspaces
        self.A = np.array([h.normal for h in halfspaces])
        self.b = np.array([h.offset for h in halfspaces])
        self._row_norms = np.linalg.norm(self.A, axis=1)
        self.vertices = self._enumerate_vertices()
        if len(self.vertices) == 0:
            raise ValidationError("Polytope description is empty or has no vertices")
        self._check_bounded()

    @property
    def dim(self):
        return self.A.shape[1]

    def _feasible(self, x, tol=DEFAULT_TOL):
        return bool(np.all(self.A @ x - self.b <= tol * self._row_norms))

    def _enumerate_vertices(self):
        vertices = []
        for rows in combinations(range(len(self.b)), self.dim):
            rows = list(rows)
            block = self.A[rows]
            if abs(np.linalg.det(block)) < 1e-12:
                continue
            vertex = np.linalg.solve(block, self.b[rows])
            if self._feasible(vertex) and not any(np.allclose(vertex, seen) for seen in vertices):
                vertices.append(vertex)
        return np.array(vertices)

    def _check_bounded(self):
        for direction in np.vstack([np.eye(self.dim), -np.eye(self.dim)]):
            result = optimize.linprog(-direction, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * self.dim)
            if result.status == 3:
                raise ValidationError("Polytope description is unbounded")
            if result.status == 2:
                raise ValidationError("Polytope description is infeasible")

    def contains(self, x, tol=DEFAULT_TOL):
        return self._feasible(as_vector(x, self.dim), tol)

    def _project(self, x):
        if self._feasible(x, 0.0):
            return x.copy()
        best, best_gap = None, np.inf
        for size in range(1, self.dim + 1):
            for rows in combinations(range(len(self.b)), size):
                rows = list(rows)
                block = self.A[rows]
                gram = block @ block.T
                if abs(np.linalg.det(gram)) < 1e-12:
                    continue
                multipliers = np.linalg.solve(gram, block @ x - self.b[rows])
                if np.any(multipliers < -1e-12):
                    continue
                candidate = x - block.T @ multipliers
                if not self._feasible(candidate, 1e-10):
                    continue
                gap = float(np.linalg.norm(candidate - x))
                if gap < best_gap:
                    best, best_gap = candidate, gap
        if best is None:
            # Degenerate numerics; the nearest vertex is still a point of the set.
            logger.warning(f"Polytope active-set projection found no KKT point for {x}")
            best = self.vertices[np.argmin(np.linalg.norm(self.vertices - x, axis=1))].copy()
        return best

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        active = np.abs(self.A @ w - self.b) <= tol * self._row_norms
        return self.A[active]

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def to_dict(self):
        return {
            "type": str(self.variant),
            "halfspaces": [{"normal": h.normal.tolist(), "offset": h.offset} for h in self.halfspaces],
        }


class AbsEpigraph(SetDescriptor):
    """``{(u, v) in R^2 : v >= |u| + shift}``."""

    variant = SetVariant.ABS_EPIGRAPH
    RIGHT_NORMAL = np.array([1.0, -1.0])
    LEFT_NORMAL = np.array([-1.0, -1.0])

    def __init__(self, shift=0.0):
        self.shift = float(shift)

    @property
    def dim(self):
        return 2

    def _project(self, x):
        u, v = x
        s = self.shift
        if v >= abs(u) + s:
            return x.copy()
        candidates = [np.array([0.0, s])]
        right = (u + v - s) / 2.0
        if right >= 0.0:
            candidates.append(np.array([right, right + s]))
        left = (u - v + s) / 2.0
        if left <= 0.0:
            candidates.append(np.array([left, -left + s]))
        # Nearest point; exact ties go to the lexicographically smallest.
        return min(candidates, key=lambda p: (float(np.linalg.norm(p - x)), p[0], p[1]))

    def contains(self, x, tol=DEFAULT_TOL):
        u, v = as_vector(x, 2)
        return v - abs(u) - self.shift >= -tol

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        u, v = w
        generators = []
        if u >= -tol and v - u - self.shift <= tol:
            generators.append(self.RIGHT_NORMAL)
        if u <= tol and v + u - self.shift <= tol:
            generators.append(self.LEFT_NORMAL)
        if not generators:
            return _no_generators(2)
        return np.array(generators)

    def to_dict(self):
        return {"type": str(self.variant), "shift": self.shift}


class FinitePointSet(SetDescriptor):
    """Finitely many points; ties in projection go to the lowest index."""

    variant = SetVariant.POINTS

    def __init__(self, points):
        points = [as_vector(point) for point in points]
        if not points:
            raise ValidationError("FinitePointSet needs at least one point")
        if len({point.size for point in points}) != 1:
            raise ValidationError("FinitePointSet points must share a dimension")
        self.points = np.array(points)
        self.is_convex = len(points) == 1

    @property
    def dim(self):
        return self.points.shape[1]

    def _project(self, x):
        return self.points[int(np.argmin(np.linalg.norm(self.points - x, axis=1)))].copy()

    def project_many(self, points):
        points = np.asarray(points, dtype=np.float64)
        gaps = np.linalg.norm(points[:, None, :] - self.points[None, :, :], axis=2)
        return self.points[np.argmin(gaps, axis=1)]

    def _normal_cone_dist(self, w, v, tol):
        # Isolated points: the cone is the whole space.
        return 0.0

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        return _whole_space(self.dim)

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def to_dict(self):
        return {"type": str(self.variant), "points": self.points.tolist()}


class Translate(SetDescriptor):
    """``inner - by``, matching the ``Omega - a`` convention."""

    variant = SetVariant.TRANSLATE

    def __init__(self, inner, by):
        self.inner = inner
        self.by = as_vector(by, inner.dim)
        self.is_convex = inner.is_convex
        self.approximate = inner.approximate

    @property
    def dim(self):
        return self.inner.dim

    def _project(self, x):
        return self.inner.project(x + self.by) - self.by

    def project_many(self, points):
        return self.inner.project_many(np.asarray(points, dtype=np.float64) + self.by) - self.by

    def contains(self, x, tol=DEFAULT_TOL):
        return self.inner.contains(as_vector(x, self.dim) + self.by, tol)

    def _normal_cone_dist(self, w, v, tol):
        return self.inner._normal_cone_dist(w + self.by, v, tol)

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        return self.inner.normal_cone_generators(w + self.by, tol)

    def bounds(self):
        box = self.inner.bounds()
        if box is None:
            return None
        return box[0] - self.by, box[1] - self.by

    def to_dict(self):
        return {"type": str(self.variant), "inner": self.inner.to_dict(), "by": self.by.tolist()}


class BallRestriction(SetDescriptor):
    """``inner`` intersected with a closed ball.

    Projection runs Dykstra-corrected cyclic projections between the two
    pieces until consecutive iterates move less than 1e-12; results are
    flagged approximate.
    """

    variant = SetVariant.BALL_RESTRICTION
    approximate = True

    def __init__(self, inner, center, radius):
        self.inner = inner
        self.ball = Ball(as_vector(center, inner.dim), radius)
        self.is_convex = inner.is_convex
        if inner.dist(self.ball.center) > self.ball.radius + DEFAULT_TOL:
            raise ValidationError("BallRestriction describes an empty set")

    @property
    def dim(self):
        return self.inner.dim

    def _project(self, x):
        if not self.inner.is_convex:
            raise UnsupportedMethodError("BallRestriction projection needs a convex inner set")
        if self.inner.contains(x, 0.0) and self.ball.contains(x, 0.0):
            return x.copy()
        current = x.copy()
        ball_correction = np.zeros_like(x)
        inner_correction = np.zeros_like(x)
        for _ in range(RESTRICTION_MAX_ITER):
            in_ball = self.ball.project(current + ball_correction)
            ball_correction = current + ball_correction - in_ball
            updated = self.inner.project(in_ball + inner_correction)
            inner_correction = in_ball + inner_correction - updated
            moved = float(np.linalg.norm(updated - current))
            current = updated
            if moved < RESTRICTION_CUTOFF and float(np.linalg.norm(updated - in_ball)) < RESTRICTION_CUTOFF:
                break
        else:
            logger.warning(f"BallRestriction projection hit {RESTRICTION_MAX_ITER} iterations")
        return current

    def contains(self, x, tol=DEFAULT_TOL):
        return self.inner.contains(x, tol) and self.ball.contains(x, tol)

    def normal_cone_generators(self, w, tol=DEFAULT_TOL):
        return np.vstack([self.inner.normal_cone_generators(w, tol), self.ball.normal_cone_generators(w, tol)])

    def bounds(self):
        lo, hi = self.ball.bounds()
        box = self.inner.bounds()
        if box is not None:
            lo, hi = np.maximum(lo, box[0]), np.minimum(hi, box[1])
        return lo, hi

    def to_dict(self):
        return {
            "type": str(self.variant),
            "inner": self.inner.to_dict(),
            "center": self.ball.center.tolist(),
            "radius": self.ball.radius,
        }


def project(s, x):
    return s.project(x)


def dist(s, x):
    return s.dist(x)


def normal_cone_dist(s, w, v, tol=DEFAULT_TOL):
    return s.normal_cone_dist(w, v, tol)
