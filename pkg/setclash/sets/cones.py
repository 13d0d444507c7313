"""Distances to finitely generated convex cones and product normal cones."""

import numpy as np
from scipy import optimize


def cone_distance(v, generators):
    """Distance from ``v`` to ``{sum_j c_j g_j : c_j >= 0}``.

    Args:
        v: Vector.
        generators: Array of shape ``(k, dim)``; ``k = 0`` means the cone
            ``{0}``.

    Returns:
        The Euclidean distance, computed by nonnegative least squares.
    """
    v = np.asarray(v, dtype=np.float64)
    generators = np.asarray(generators, dtype=np.float64)
    if generators.size == 0:
        return float(np.linalg.norm(v))
    _, residual = optimize.nnls(generators.T, v)
    return float(residual)


def product_normal_cone_check(s1, s2, w1, w2, v1, v2, tol=1e-9):
    """Whether ``(v1, v2)`` lies in the normal cone of ``s1 x s2`` at ``(w1, w2)``.

    The normal cone of a product is the product of the normal cones, so
    the check is componentwise.
    """
    return s1.normal_cone_dist(w1, v1, tol) <= tol and s2.normal_cone_dist(w2, v2, tol) <= tol
