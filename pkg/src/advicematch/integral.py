"""Integral online matching with distributional advice (quantize and route).

The advice is quantized to an N-slot multiset D which is matched offline to
the servers. Each online request is matched by the blackbox to a free slot of
D and inherits that slot's server.
"""
from __future__ import annotations

import time

import numpy as np

from .assignment import IntegralMatching, solve_integral
from .baselines import CapacityError, OnlineMatcher
from .distributions import (
    AdviceDistribution,
    QuantizerConfig,
    QuantizerResult,
    advice_proxy,
    empirical,
    quantize,
    wasserstein1,
)
from .metric import MetricSpace
from .report import RunReport, competitive_ratio
from .seeds import derive_seed

# target size of the advice proxy used for the eta and residual estimates
PROXY_BUDGET = 2048


def default_resolution(n: int) -> int:
    """Largest multiple of n within the proxy budget, and at most n * n."""
    return n * max(1, min(n, PROXY_BUDGET // n))


class AdviceIntegral:
    name = "advice_integral"

    def __init__(self, servers, advice: AdviceDistribution, space: MetricSpace,
                 params: QuantizerConfig | None = None, seed: int = 0, baseline: str = "greedy"):
        self.space = space
        self.servers = space.points(servers)
        self.n = self.servers.shape[0]
        if self.n < 1:
            raise ValueError("need at least one server")
        self.advice = advice
        self.seed = seed
        self.quantizer: QuantizerResult = quantize(advice, self.n, params, derive_seed(seed, 0), space)
        self.slots = space.points(self.quantizer.slots())
        self.slot_cost = space.pairwise(self.slots, self.servers)
        opt_ds = solve_integral(self.slot_cost)
        self.partner = opt_ds.pairing  # slot -> server
        self.offline_cost = opt_ds.total_cost
        self.matcher = OnlineMatcher(baseline, self.slots, space, derive_seed(seed, 1))
        # free slots per blackbox location
        self._free = [list(m) for m in self.matcher._members]
        self.served_slots: list[int] = []

    @property
    def served(self) -> int:
        return len(self.served_slots)

    @property
    def online_cost(self) -> float:
        return self.matcher.cost

    def _partner_dist(self, request, slots) -> np.ndarray:
        return self.space.distances_from(request, self.servers[self.partner[slots]])

    def _pick_slot(self, request, loc: int) -> int:
        free = self._free[loc]
        if len(free) == 1:
            return free[0]
        d = self._partner_dist(request, free)
        return free[int(d.argmin())]

    def _tie_break(self, request):
        def choose(locs: np.ndarray) -> int:
            best = [self._partner_dist(request, self._free[k]).min() for k in locs]
            return int(locs[int(np.argmin(best))])
        return choose

    def serve(self, request) -> int:
        """Route one request; returns the server index it is matched to."""
        if self.served >= self.n:
            raise CapacityError(f"all {self.n} slots already used")
        req = self.space.point(request)
        loc = self.matcher.serve(req, tie_break=self._tie_break(req))
        slot = self._pick_slot(req, loc)
        self._free[loc].remove(slot)
        self.served_slots.append(slot)
        return int(self.partner[slot])


def prepare(servers, advice: AdviceDistribution, space: MetricSpace,
            params: QuantizerConfig | None = None, seed: int = 0,
            baseline: str = "greedy") -> AdviceIntegral:
    return AdviceIntegral(servers, advice, space, params, seed, baseline)


def run(servers, advice: AdviceDistribution, requests, space: MetricSpace,
        baseline: str = "greedy", seed: int = 0, params: QuantizerConfig | None = None,
        resolution: int | None = None) -> tuple[IntegralMatching, RunReport]:
    t0 = time.perf_counter()
    servers, requests = space.points(servers), space.points(requests)
    n = servers.shape[0]
    if requests.shape[0] != n:
        raise ValueError(f"{requests.shape[0]} requests for {n} servers")
    state = AdviceIntegral(servers, advice, space, params, seed, baseline)
    pairing = np.array([state.serve(r) for r in requests], dtype=np.int64)
    cost = space.pairwise(requests, servers)
    actual = float(cost[np.arange(n), pairing].sum())
    opt = solve_integral(cost).total_cost

    res = resolution or default_resolution(n)
    proxy = advice_proxy(advice, res, derive_seed(seed, 2))
    slots_emp = empirical(state.slots)
    eta_hat = wasserstein1(proxy, empirical(requests), space)
    residual = wasserstein1(slots_emp, proxy, space)
    opt_rd = solve_integral(space.pairwise(requests, state.slots)).total_cost
    report = RunReport(
        algo="advice_integral", N=n, seed=seed,
        actual_cost=actual, opt_cost=opt,
        eta_hat=eta_hat, residual_w1=residual,
        online_cost=state.online_cost, offline_cost=state.offline_cost,
        beta_emp=competitive_ratio(state.online_cost, opt_rd),
        ms=1000 * (time.perf_counter() - t0),
        proxy_size=0 if advice.is_finite else res,
        matching=pairing,
    )
    return IntegralMatching(pairing, actual), report
