"""Solver for the algebraic loops formed by direct feedthrough within one step."""
from collections.abc import Callable

import numpy as np

from src.errors import SingularSystemError

# fn(z, linear_only) -> g(z); with linear_only the states and exogenous
# inputs are treated as zero so that fn is the linear part of g.
AffineMap = Callable[[np.ndarray, bool], np.ndarray]


def solve_affine(fn: AffineMap, dim: int) -> np.ndarray:
    """Fixed point z = g(z) of an affine map g(z) = g(0) + J z."""
    if dim == 0:
        return np.zeros(0)
    g0 = np.asarray(fn(np.zeros(dim), False), dtype=float)
    J = np.empty((dim, dim))
    eye = np.eye(dim)
    for i in range(dim):
        J[:, i] = fn(eye[i], True)
    if not np.any(J):
        return g0
    lhs = eye - J
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystemError(f"algebraic loop is ill-posed (condition number of I - J is {cond:.3e})")
    return np.linalg.solve(lhs, g0)
