"""Exact offline min-cost matching: integral, fractional and weighted transport."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

TOL = 1e-9
# masses below this (relative to total) are treated as exhausted
_MASS_EPS = 1e-12


class AssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class IntegralMatching:
    """``pairing[r]`` is the server index assigned to request ``r``."""

    pairing: np.ndarray
    total_cost: float

    def recompute(self, costs: np.ndarray) -> float:
        costs = np.asarray(costs, dtype=float)
        return float(costs[np.arange(len(self.pairing)), self.pairing].sum())

    def as_weights(self, n_servers: int | None = None) -> np.ndarray:
        m = len(self.pairing) if n_servers is None else n_servers
        w = np.zeros((len(self.pairing), m))
        w[np.arange(len(self.pairing)), self.pairing] = 1.0
        return w


@dataclass(frozen=True)
class FractionalMatching:
    """Dense weight matrix ``weights[r, s]``; see :meth:`edges` for the sparse view."""

    weights: np.ndarray
    total_cost: float

    def edges(self, tol: float = 0.0) -> list[tuple[int, int, float]]:
        r, s = np.nonzero(self.weights > tol)
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(r, s)]

    def recompute(self, costs: np.ndarray) -> float:
        return float((self.weights * np.asarray(costs, dtype=float)).sum())


@dataclass(frozen=True)
class WeightedTransportPlan:
    flows: np.ndarray
    total_cost: float

    def edges(self, tol: float = 0.0) -> list[tuple[int, int, float]]:
        i, j = np.nonzero(self.flows > tol)
        return [(int(a), int(b), float(self.flows[a, b])) for a, b in zip(i, j)]


def _check_costs(costs, square: bool = True) -> np.ndarray:
    c = np.asarray(costs, dtype=float)
    if c.ndim != 2:
        raise AssignmentError(f"cost matrix must be 2-d, got shape {c.shape}")
    if square and c.shape[0] != c.shape[1]:
        raise AssignmentError(f"cost matrix must be square, got shape {c.shape}")
    if c.size == 0:
        raise AssignmentError("cost matrix is empty")
    if not np.all(np.isfinite(c)):
        raise AssignmentError("cost matrix has non-finite entries")
    if np.any(c < 0):
        raise AssignmentError("cost matrix has negative entries")
    return c


def solve_integral(costs) -> IntegralMatching:
    c = _check_costs(costs)
    rows, cols = linear_sum_assignment(c)
    pairing = np.empty(c.shape[0], dtype=np.int64)
    pairing[rows] = cols
    return IntegralMatching(pairing, float(c[rows, cols].sum()))


def solve_fractional(costs) -> FractionalMatching:
    """LP relaxation of the assignment ILP, solved with HiGHS.

    Each request carries unit demand (``sum_s x = 1``), each server has unit
    capacity (``sum_r x <= 1``), and ``0 <= x <= 1``.
    """
    c = _check_costs(costs)
    n = c.shape[0]
    if n == 1:
        return FractionalMatching(np.ones((1, 1)), float(c[0, 0]))
    idx = np.arange(n * n)
    rows_of = sparse.csr_matrix((np.ones(n * n), (idx // n, idx)), shape=(n, n * n))
    cols_of = sparse.csr_matrix((np.ones(n * n), (idx % n, idx)), shape=(n, n * n))
    res = linprog(
        c.ravel(),
        A_ub=cols_of, b_ub=np.ones(n),
        A_eq=rows_of, b_eq=np.ones(n),
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status != 0:
        raise AssignmentError(f"fractional LP failed: {res.message}")
    w = np.clip(res.x.reshape(n, n), 0.0, 1.0)
    return FractionalMatching(w, float((w * c).sum()))


# "auto" dispatch thresholds: source-sink pairs for SSP, unit slots for assignment
SSP_LIMIT = 40_000
ASSIGNMENT_LIMIT = 6000


def solve_transport(supplies, demands, costs, method: str = "auto") -> WeightedTransportPlan:
    """Min-cost transport plan moving ``supplies`` onto ``demands``.

    Methods: ``"ssp"`` successive shortest paths (any real masses);
    ``"assignment"`` expands integer masses into unit slots and solves the
    resulting assignment problem; ``"lp"`` hands the network LP to HiGHS dual
    simplex. The last two return integral flows for integer masses.
    """
    c = _check_costs(costs, square=False)
    if method == "auto":
        a = np.asarray(supplies, dtype=float)
        integer = np.array_equal(a, np.rint(a)) and np.array_equal(
            np.asarray(demands, float), np.rint(np.asarray(demands, float)))
        total = a.sum()
        # unit slots are cheap when there are about as many as nodes
        if integer and total <= ASSIGNMENT_LIMIT and total <= 2 * sum(c.shape):
            method = "assignment"
        elif c.size <= SSP_LIMIT:
            method = "ssp"
        elif integer and total <= ASSIGNMENT_LIMIT:
            method = "assignment"
        else:
            method = "lp"
    if method == "ssp":
        return _transport_ssp(supplies, demands, c)
    if method == "assignment":
        return _transport_assignment(supplies, demands, c)
    if method == "lp":
        return _transport_lp(supplies, demands, c)
    raise AssignmentError(f"unknown transport method {method!r}")


def _transport_assignment(supplies, demands, c):
    a, b = _check_masses(supplies, demands, c)
    ai, bi = np.rint(a).astype(np.int64), np.rint(b).astype(np.int64)
    if not (np.array_equal(ai, a) and np.array_equal(bi, b)) or ai.sum() != bi.sum():
        raise AssignmentError("assignment route needs integer masses with equal totals")
    rows = np.repeat(np.arange(c.shape[0]), ai)
    cols = np.repeat(np.arange(c.shape[1]), bi)
    r, k = linear_sum_assignment(c[np.ix_(rows, cols)])
    flow = np.zeros(c.shape)
    np.add.at(flow, (rows[r], cols[k]), 1.0)
    return WeightedTransportPlan(flow, float((flow * c).sum()))


def _check_masses(supplies, demands, c):
    a = np.asarray(supplies, dtype=float).ravel().copy()
    b = np.asarray(demands, dtype=float).ravel().copy()
    n, m = c.shape
    if a.size != n or b.size != m:
        raise AssignmentError(f"cost shape {c.shape} does not match {a.size} supplies x {b.size} demands")
    if np.any(a < 0) or np.any(b < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise AssignmentError("masses must be finite and nonnegative")
    total = a.sum()
    if abs(total - b.sum()) > TOL * max(1.0, total):
        raise AssignmentError(f"unbalanced masses: supplies sum to {total}, demands to {b.sum()}")
    return a, b


def _transport_lp(supplies, demands, c):
    a, b = _check_masses(supplies, demands, c)
    n, m = c.shape
    idx = np.arange(n * m)
    A = sparse.vstack([
        sparse.csr_matrix((np.ones(n * m), (idx // m, idx)), shape=(n, n * m)),
        sparse.csr_matrix((np.ones(n * m), (idx % m, idx)), shape=(m, n * m)),
    ]).tocsr()
    # rescale demands so the equality system is exactly consistent
    b = b * (a.sum() / b.sum()) if b.sum() > 0 else b
    res = linprog(c.ravel(), A_eq=A, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise AssignmentError(f"transport LP failed: {res.message}")
    flow = np.maximum(res.x.reshape(n, m), 0.0)
    return WeightedTransportPlan(flow, float((flow * c).sum()))


def _transport_ssp(supplies, demands, c) -> WeightedTransportPlan:
    """Successive shortest paths with real capacities.

    Dijkstra runs on the dense bipartite residual graph with node potentials,
    so every augmentation follows a cheapest path in the current residual
    network. Each augmentation exhausts a source, a sink or a reverse edge.
    """
    a, b = _check_masses(supplies, demands, c)
    n, m = c.shape
    total = a.sum()
    eps = _MASS_EPS * max(1.0, total)

    flow = np.zeros((n, m))
    pot_s = np.zeros(n)
    pot_t = c.min(axis=0)
    while True:
        live = a > eps
        if not live.any() or not (b > eps).any():
            break
        dist_s = np.where(live, 0.0, np.inf)
        dist_t = np.full(m, np.inf)
        pred_s = np.full(n, -1)
        pred_t = np.full(m, -1)
        done_s = np.zeros(n, bool)
        done_t = np.zeros(m, bool)
        target = -1
        while True:
            ds = np.where(done_s, np.inf, dist_s)
            dt = np.where(done_t, np.inf, dist_t)
            i, j = int(ds.argmin()), int(dt.argmin())
            if ds[i] == np.inf and dt[j] == np.inf:
                break
            if ds[i] <= dt[j]:
                done_s[i] = True
                rc = np.maximum(c[i] + pot_s[i] - pot_t, 0.0)
                cand = ds[i] + rc
                upd = (cand < dist_t) & ~done_t
                dist_t[upd] = cand[upd]
                pred_t[upd] = i
            else:
                done_t[j] = True
                if b[j] > eps:
                    target = j
                    break
                back = flow[:, j] > eps
                rc = np.maximum(-c[:, j] + pot_t[j] - pot_s, 0.0)
                cand = dt[j] + rc
                upd = back & (cand < dist_s) & ~done_s
                dist_s[upd] = cand[upd]
                pred_s[upd] = j
        if target < 0:
            raise AssignmentError("no augmenting path; masses cannot be routed")
        D = dist_t[target]
        pot_s += np.minimum(dist_s, D)
        pot_t += np.minimum(dist_t, D)

        # walk back to the originating source, collecting the bottleneck
        path = []
        j = target
        delta = b[target]
        while True:
            i = pred_t[j]
            path.append((i, j))
            jp = pred_s[i]
            if jp < 0:
                delta = min(delta, a[i])
                break
            delta = min(delta, flow[i, jp])
            j = jp
        for k, (i, j) in enumerate(path):
            flow[i, j] += delta
            if k + 1 < len(path):
                flow[i, path[k + 1][1]] -= delta
        a[path[-1][0]] -= delta
        b[target] -= delta
        np.maximum(flow, 0.0, out=flow)

    return WeightedTransportPlan(flow, float((flow * c).sum()))


def integral_flows(plan: WeightedTransportPlan, tol: float = 1e-6) -> np.ndarray:
    """Integer flow matrix of a plan computed for integer masses."""
    r = np.rint(plan.flows)
    if np.max(np.abs(plan.flows - r), initial=0.0) > tol:
        raise AssignmentError("transport plan is not integral")
    return r.astype(np.int64)


def check_integral(m: IntegralMatching, costs, tol: float = TOL) -> None:
    n = len(m.pairing)
    if sorted(m.pairing.tolist()) != list(range(n)):
        raise AssertionError("pairing is not a permutation")
    got = m.recompute(costs)
    if abs(got - m.total_cost) > tol * max(1.0, abs(got)):
        raise AssertionError(f"stored cost {m.total_cost} != recomputed {got}")


def check_fractional(m: FractionalMatching, costs, tol: float = TOL) -> None:
    w = m.weights
    if np.any(w < -tol) or np.any(w > 1 + tol):
        raise AssertionError("weights outside [0, 1]")
    rows = w.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > tol:
        raise AssertionError(f"row sums deviate from 1 by {np.max(np.abs(rows - 1.0))}")
    cols = w.sum(axis=0)
    if cols.max() > 1 + tol:
        raise AssertionError(f"column sum {cols.max()} exceeds 1")
    got = m.recompute(costs)
    if abs(got - m.total_cost) > tol * max(1.0, abs(got)):
        raise AssertionError(f"stored cost {m.total_cost} != recomputed {got}")


def check_transport(plan: WeightedTransportPlan, supplies, demands, tol: float = TOL) -> None:
    out = plan.flows.sum(axis=1)
    inn = plan.flows.sum(axis=0)
    if np.max(np.abs(out - np.asarray(supplies, float))) > tol:
        raise AssertionError("outflow does not match supplies")
    if np.max(np.abs(inn - np.asarray(demands, float))) > tol:
        raise AssertionError("inflow does not match demands")
