# tests/test_engine/oracles.py
"""
Brute-force references for the exact engines.

Unit balls and dual unit balls of supC0, ell1 and bvC0 on the window
0..dim-1 are listed vertex by vertex, and distances and gaps are float
linear programs on scipy's HiGHS. Nothing here goes through cdd.
"""

import itertools
from fractions import Fraction
from typing import List, Sequence

import numpy as np
from scipy.optimize import linprog

FAMILIES = ("supC0", "ell1", "bvC0")


def _cube(dim: int) -> List[np.ndarray]:
    return [np.array(signs, dtype=int) for signs in itertools.product((1, -1), repeat=dim)]


def _axes(dim: int) -> List[np.ndarray]:
    eye = np.eye(dim, dtype=int)
    return [sign * eye[i] for i in range(dim) for sign in (1, -1)]


def unit_ball_vertices(family: str, dim: int) -> List[np.ndarray]:
    if family == "supC0":
        return _cube(dim)
    if family == "ell1":
        return _axes(dim)
    if family == "bvC0":
        # |x0|, |x1|, |x_m + x1| <= 1 is the cube under x_m = y_m - y1
        out = []
        for y in _cube(dim):
            x = y.copy()
            x[2:] = y[2:] - y[1]
            out.append(x)
        return out
    raise ValueError(family)


def dual_ball_vertices(family: str, dim: int) -> List[np.ndarray]:
    if family == "supC0":
        return _axes(dim)
    if family == "ell1":
        return _cube(dim)
    if family == "bvC0":
        rows = [np.eye(dim, dtype=int)[0], np.eye(dim, dtype=int)[1]]
        for m in range(2, dim):
            row = np.zeros(dim, dtype=int)
            row[1] = row[m] = 1
            rows.append(row)
        return [sign * row for row in rows for sign in (1, -1)]
    raise ValueError(family)


def norm(family: str, x: Sequence[int]) -> Fraction:
    x = np.asarray(x, dtype=int)
    return Fraction(int(max(g @ x for g in dual_ball_vertices(family, len(x)))))


def dual_norm(family: str, f: Sequence[int]) -> Fraction:
    f = np.asarray(f, dtype=int)
    return Fraction(int(max(f @ v for v in unit_ball_vertices(family, len(f)))))


def _norm_rows(family: str, dim: int) -> np.ndarray:
    return np.array(dual_ball_vertices(family, dim), dtype=float)


def hyperplane_distance(family: str, x: Sequence[int], f: Sequence[int], level: int) -> float:
    """min ||x - z|| over <f, z> = level; variables (z, t)."""
    dim = len(x)
    rows = _norm_rows(family, dim)
    x = np.asarray(x, dtype=float)
    # g.(x - z) <= t  <=>  -g.z - t <= -g.x
    a_ub = np.hstack([-rows, -np.ones((len(rows), 1))])
    b_ub = -rows @ x
    a_eq = np.hstack([np.asarray(f, dtype=float), [0.0]])[None, :]
    cost = np.zeros(dim + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * dim + [(0, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[float(level)],
                     bounds=bounds, method="highs")
    assert result.status == 0, result.message
    return float(result.fun)


def polytope_gap(family: str, a_vertices: Sequence[Sequence[int]],
                 b_vertices: Sequence[Sequence[int]]) -> float:
    """min ||a - b|| over a in conv(A), b in conv(B); variables (lambda, mu, t)."""
    A = np.asarray(a_vertices, dtype=float)
    B = np.asarray(b_vertices, dtype=float)
    rows = _norm_rows(family, A.shape[1])
    na, nb = len(A), len(B)
    # g.(A^T lambda - B^T mu) <= t
    a_ub = np.hstack([rows @ A.T, -rows @ B.T, -np.ones((len(rows), 1))])
    b_ub = np.zeros(len(rows))
    a_eq = np.zeros((2, na + nb + 1))
    a_eq[0, :na] = 1.0
    a_eq[1, na:na + nb] = 1.0
    cost = np.zeros(na + nb + 1)
    cost[-1] = 1.0
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0, 1.0],
                     bounds=[(0, None)] * (na + nb + 1), method="highs")
    assert result.status == 0, result.message
    return float(result.fun)
