"""Shared oracles and strategies.

The oracles here are deliberately naive (exhaustive enumeration, a dense LP
written from scratch) so they share no code with the solvers under test.
"""
from __future__ import annotations

from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.optimize import linprog


def brute_force_assignment(costs: np.ndarray) -> float:
    n = costs.shape[0]
    rows = np.arange(n)
    return min(float(costs[rows, list(p)].sum()) for p in permutations(range(n)))


def brute_force_rectangular(costs: np.ndarray) -> float:
    """Min cost of matching every row to a distinct column (rows <= cols)."""
    k, m = costs.shape
    rows = np.arange(k)
    return min(float(costs[rows, list(p)].sum()) for p in permutations(range(m), k))


def transport_lp(supplies, demands, costs) -> float:
    """Dense equality-constrained transport LP."""
    a, b = np.asarray(supplies, float), np.asarray(demands, float)
    m, n = costs.shape
    A = np.zeros((m + n, m * n))
    for i in range(m):
        A[i, i * n:(i + 1) * n] = 1
    for j in range(n):
        A[m + j, j::n] = 1
    res = linprog(costs.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def brute_force_medoids(dmat: np.ndarray, w: np.ndarray, n: int) -> float:
    m = dmat.shape[0]
    return min(float(w @ dmat[:, list(c)].min(axis=1)) for c in combinations(range(m), n))


def sorted_matching_1d(x, y) -> float:
    """On the line, matching sorted to sorted is optimal for equal-size multisets."""
    return float(np.abs(np.sort(np.ravel(x)) - np.sort(np.ravel(y))).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cost_matrices(max_n: int = 6, integers: bool = False):
    elems = (st.integers(0, 20).map(float) if integers
             else st.floats(0, 100, allow_nan=False, allow_infinity=False))
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.lists(elems, min_size=n, max_size=n), min_size=n, max_size=n)
    ).map(np.array)


def point_sets(n_min: int = 1, n_max: int = 8, dim: int = 1):
    coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=32)
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(st.lists(coord, min_size=dim, max_size=dim), min_size=n, max_size=n)
    ).map(lambda v: np.array(v, dtype=float))
