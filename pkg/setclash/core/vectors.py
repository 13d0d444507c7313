"""Vector helpers.

Points, shifts and dual vectors are plain float64 numpy arrays of shape
``(dim,)``; these helpers convert and validate them at the boundaries.
"""

import numpy as np
import numpy.typing as npt

from common.exceptions import DimensionMismatch

Vector = npt.NDArray[np.float64]


def as_vector(coords, dim=None):
    """Convert ``coords`` to a finite 1-D float64 array.

    Args:
        coords: Sequence of numbers or an array.
        dim: Expected dimension, if known.

    Returns:
        A fresh numpy array.

    Raises:
        DimensionMismatch: Wrong shape or dimension.
        ValueError: Non-finite coordinates.
    """
    vector = np.array(coords, dtype=np.float64)
    if vector.ndim != 1 or vector.size < 1:
        raise DimensionMismatch(f"Expected a non-empty 1-D vector, got shape {vector.shape}")
    if dim is not None and vector.size != dim:
        raise DimensionMismatch(f"Expected dimension {dim}, got {vector.size}")
    if not np.all(np.isfinite(vector)):
        raise ValueError(f"Vector has non-finite coordinates: {vector}")
    return vector


def as_tuple(parts, count=None, dim=None):
    """Convert a sequence of vectors into a tuple of arrays of equal dimension."""
    vectors = tuple(as_vector(part) for part in parts)
    if count is not None and len(vectors) != count:
        raise DimensionMismatch(f"Expected {count} components, got {len(vectors)}")
    if not vectors:
        raise DimensionMismatch("Expected at least one component")
    common = vectors[0].size if dim is None else dim
    for index, vector in enumerate(vectors):
        if vector.size != common:
            raise DimensionMismatch(
                f"Component {index} has dimension {vector.size}, expected {common}"
            )
    return vectors


def norm(vector):
    return float(np.linalg.norm(vector))


def flatten(parts):
    """Stack a tuple of equal-size vectors into one flat array."""
    return np.concatenate([np.asarray(part, dtype=np.float64) for part in parts])


def unflatten(flat, count):
    """Inverse of :func:`flatten` for ``count`` equal-size components."""
    return tuple(np.array(chunk) for chunk in np.split(np.asarray(flat, dtype=np.float64), count))


def unit_directions(rng, count, dim):
    """``count`` directions uniformly distributed on the unit sphere."""
    directions = rng.standard_normal((count, dim))
    lengths = np.linalg.norm(directions, axis=1, keepdims=True)
    lengths[lengths == 0.0] = 1.0
    return directions / lengths
