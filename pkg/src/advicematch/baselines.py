"""Adviceless online matching algorithms.

``OnlineMatcher`` is the integral blackbox used inside both advice
algorithms; ``GreedyFractional`` is a plain fractional baseline.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .assignment import IntegralMatching
from .metric import MetricSpace, unique_points

KINDS = ("greedy", "permutation")


class CapacityError(RuntimeError):
    pass


class OnlineMatcher:
    """Irrevocable online matching of requests to a server multiset.

    Servers sharing a location are one location with a capacity counter.
    ``serve`` returns the index of the chosen location in ``self.locations``.
    """

    def __init__(self, kind: str, servers, space: MetricSpace, seed: int = 0):
        if kind not in KINDS:
            raise ValueError(f"unknown baseline kind {kind!r}; expected one of {KINDS}")
        servers = space.points(servers)
        if servers.shape[0] == 0:
            raise ValueError("online matcher needs at least one server")
        self.kind = kind
        self.space = space
        self.seed = seed
        self.servers = servers
        self.locations, self._server_loc, self.capacity = unique_points(space, servers)
        self.available = self.capacity.copy()
        # server indices at each location, consumed in increasing order
        self._members = [list(np.flatnonzero(self._server_loc == k)) for k in range(len(self.capacity))]
        self.history: list[tuple[np.ndarray, int]] = []
        self.cost = 0.0
        if kind == "permutation":
            self._init_permutation()

    @property
    def served(self) -> int:
        return len(self.history)

    def serve(self, request, tie_break: Optional[Callable[[np.ndarray], int]] = None) -> int:
        """Match one request; ``tie_break`` picks among equidistant locations (greedy only)."""
        if self.available.sum() <= 0:
            raise CapacityError("all server capacity is exhausted")
        req = self.space.point(request)
        d = self.space.distances_from(req, self.locations)
        if self.kind == "greedy":
            masked = np.where(self.available > 0, d, np.inf)
            best = masked.min()
            ties = np.flatnonzero(masked == best)
            loc = int(ties[0]) if tie_break is None or ties.size == 1 else int(tie_break(ties))
        else:
            loc = self._serve_permutation(d)
        self.available[loc] -= 1
        self.history.append((req, loc))
        self.cost += float(d[loc])
        return loc

    def take_server(self, loc: int) -> int:
        """Original server index for a location just chosen by :meth:`serve`."""
        return int(self._members[loc].pop(0))

    # permutation algorithm: incremental Hungarian over capacity slots. Each
    # new row adds one augmenting path, so the set of used slots grows by
    # exactly one; the request is matched to that slot's location.
    def _init_permutation(self):
        self._slot_loc = np.repeat(np.arange(len(self.capacity)), self.capacity)
        m = self._slot_loc.size
        self._rows: list[np.ndarray] = []
        self._u = [0.0]
        self._v = np.zeros(m + 1)
        self._p = np.zeros(m + 1, dtype=np.int64)

    def _serve_permutation(self, loc_dist: np.ndarray) -> int:
        self._rows.append(loc_dist[self._slot_loc])
        i = len(self._rows)
        self._u.append(0.0)
        m = self._slot_loc.size
        u, v, p = self._u, self._v, self._p
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, bool)
        way = np.zeros(m + 1, dtype=np.int64)
        p[0] = i
        j0 = 0
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = np.full(m + 1, np.inf)
            cur[1:] = self._rows[i0 - 1] - u[i0] - v[1:]
            better = ~used & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            cand = np.where(used, np.inf, minv)
            j1 = int(cand.argmin())
            delta = cand[j1]
            for j in np.flatnonzero(used):
                u[p[j]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        new_slot = j0
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
        return int(self._slot_loc[new_slot - 1])


def run_online(kind: str, servers, requests, space: MetricSpace, seed: int = 0) -> IntegralMatching:
    servers = space.points(servers)
    requests = space.points(requests)
    if requests.shape[0] > servers.shape[0]:
        raise CapacityError(f"{requests.shape[0]} requests exceed {servers.shape[0]} servers")
    matcher = OnlineMatcher(kind, servers, space, seed)
    pairing = np.empty(requests.shape[0], dtype=np.int64)
    for t, r in enumerate(requests):
        pairing[t] = matcher.take_server(matcher.serve(r))
    cost = float(space.pairwise(requests, servers)[np.arange(len(pairing)), pairing].sum())
    return IntegralMatching(pairing, cost)


class GreedyFractional:
    """Fractional greedy: fill the nearest tier of servers with spare capacity
    first, splitting within a tier in proportion to spare capacity."""

    name = "greedy_fractional"

    def __init__(self, servers, space: MetricSpace):
        self.space = space
        self.servers = space.points(servers)
        self.load = np.zeros(self.servers.shape[0])
        self.rows: list[np.ndarray] = []

    def serve(self, request) -> np.ndarray:
        d = self.space.distances_from(request, self.servers)
        spare = np.clip(1.0 - self.load, 0.0, None)
        row = np.zeros_like(spare)
        need = 1.0
        for level in np.unique(d[spare > 1e-15]):
            if need <= 1e-15:
                break
            tier = (d == level) & (spare > 1e-15)
            room = spare[tier].sum()
            take = min(need, room)
            row[tier] += take * spare[tier] / room
            need -= take
        if need > 1e-9:
            raise CapacityError("fractional capacity exhausted")
        self.load += row
        self.rows.append(row)
        return row
