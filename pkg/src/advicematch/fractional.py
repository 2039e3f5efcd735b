"""Fractional online matching with distributional advice (sample blow-up).

Offline, the algorithm draws K = C*N points from the advice, makes C copies
of every server and solves the blown-up offline matching. Online, every
request is fed C times into an integral blackbox whose servers are the
samples; the two integral matchings are composed through the sample
locations and scaled down by C:

    m(r, s) = (1/C) * sum_p deg_r(p) * deg_s(p)

where deg_r(p) is the share of location p's sample copies taken by copies
of r and deg_s(p) counts the copies of s matched to p offline.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .assignment import FractionalMatching, integral_flows, solve_integral, solve_transport
from .baselines import CapacityError, OnlineMatcher
from .distributions import (
    AdviceDistribution,
    advice_proxy,
    empirical,
    largest_remainder,
    sample,
    wasserstein1,
)
from .metric import MetricSpace
from .report import RunReport, competitive_ratio
from .seeds import derive_seed

MAX_SAMPLES = 10_000


def default_copies(n: int, cap: int = MAX_SAMPLES) -> int:
    """C = N, reduced so that C * N stays within ``cap``."""
    return max(1, min(n, cap // max(n, 1)))


@dataclass(frozen=True)
class BlowupConfig:
    copies: int
    seed: int = 0

    def __post_init__(self):
        if int(self.copies) != self.copies or self.copies < 1:
            raise ValueError(f"copies must be a positive integer, got {self.copies!r}")

    def sample_count(self, n: int) -> int:
        return self.copies * n


def blowup_sample(advice: AdviceDistribution, k: int, seed: int) -> np.ndarray:
    """K points standing in for the advice.

    Finite advice is expanded deterministically (largest-remainder counts of
    mass * K); continuous advice is sampled i.i.d.
    """
    if advice.is_finite:
        return np.repeat(advice.dist.atoms, largest_remainder(advice.dist.masses, k), axis=0)
    return sample(advice, k, seed)


@dataclass
class DegreeTables:
    r_degrees: np.ndarray  # (requests served, locations), rational entries in [0, 1]
    s_degrees: np.ndarray  # (servers, locations), nonnegative integers
    multiplicity: np.ndarray  # (locations,)


class AdviceFractional:
    """Online state of the fractional advice algorithm for one instance."""

    name = "advice_fractional"

    def __init__(self, servers, advice: AdviceDistribution, space: MetricSpace,
                 cfg: BlowupConfig, baseline: str = "greedy"):
        self.space = space
        self.servers = space.points(servers)
        self.advice = advice
        self.cfg = cfg
        self.baseline = baseline
        self.n = self.servers.shape[0]
        if self.n < 1:
            raise ValueError("need at least one server")
        self.copies = cfg.copies
        self.samples = space.points(blowup_sample(advice, cfg.sample_count(self.n), derive_seed(cfg.seed, 0)))
        self.matcher = OnlineMatcher(baseline, self.samples, space, derive_seed(cfg.seed, 1))
        self.locations = self.matcher.locations
        self.multiplicity = self.matcher.capacity.copy()
        plan = solve_transport(
            self.multiplicity,
            np.full(self.n, self.copies),
            space.pairwise(self.locations, self.servers),
        )
        self.s_degrees = integral_flows(plan).T
        self.offline_cost = plan.total_cost
        self._r_degrees: list[np.ndarray] = []
        self.rows: list[np.ndarray] = []

    @property
    def served(self) -> int:
        return len(self.rows)

    @property
    def online_cost(self) -> float:
        """Blackbox cost of matching the request copies to the samples."""
        return self.matcher.cost

    @property
    def degrees(self) -> DegreeTables:
        r = np.array(self._r_degrees).reshape(-1, self.locations.shape[0])
        return DegreeTables(r, self.s_degrees, self.multiplicity)

    def serve(self, request) -> np.ndarray:
        if self.served >= self.n:
            raise CapacityError(f"all {self.n} requests already served")
        taken = np.zeros(self.locations.shape[0])
        for _ in range(self.copies):
            taken[self.matcher.serve(request)] += 1
        deg_r = taken / self.multiplicity
        row = (self.s_degrees @ deg_r) / self.copies
        self._r_degrees.append(deg_r)
        self.rows.append(row)
        return row

    def matching(self, requests) -> FractionalMatching:
        w = np.array(self.rows).reshape(-1, self.n)
        cost = self.space.pairwise(requests, self.servers)
        return FractionalMatching(w, float((w * cost).sum()))


def prepare(servers, advice: AdviceDistribution, cfg: BlowupConfig, space: MetricSpace,
            baseline: str = "greedy") -> AdviceFractional:
    return AdviceFractional(servers, advice, space, cfg, baseline)


def serve_fractional(state: AdviceFractional, request) -> np.ndarray:
    return state.serve(request)


def run(servers, advice: AdviceDistribution, requests, cfg: BlowupConfig,
        baseline: str = "greedy", space: MetricSpace | None = None,
        resolution: int | None = None) -> tuple[FractionalMatching, RunReport]:
    if space is None:
        raise ValueError("a metric space is required")
    t0 = time.perf_counter()
    servers, requests = space.points(servers), space.points(requests)
    if servers.shape[0] != requests.shape[0]:
        raise ValueError(f"{requests.shape[0]} requests for {servers.shape[0]} servers")
    state = AdviceFractional(servers, advice, space, cfg, baseline)
    for r in requests:
        state.serve(r)
    m = state.matching(requests)
    n, C = state.n, state.copies
    opt = solve_integral(space.pairwise(requests, servers)).total_cost

    k = cfg.sample_count(n)
    proxy = advice_proxy(advice, resolution or k, derive_seed(cfg.seed, 2))
    req_emp, sample_emp = empirical(requests), empirical(state.samples)
    eta_hat = wasserstein1(proxy, req_emp, space)
    residual = wasserstein1(sample_emp, proxy, space)
    # OPT_I(R~, D~) = K * W1(R, D~) for uniform multisets of size K
    blown_opt = k * wasserstein1(req_emp, sample_emp, space)
    beta = competitive_ratio(state.online_cost, blown_opt)
    report = RunReport(
        algo="advice_fractional", N=n, seed=cfg.seed,
        actual_cost=m.total_cost, opt_cost=opt,
        eta_hat=eta_hat, residual_w1=residual,
        online_cost=state.online_cost / C, offline_cost=state.offline_cost / C,
        beta_emp=beta, ms=1000 * (time.perf_counter() - t0),
        proxy_size=0 if advice.is_finite else (resolution or k), copies=C,
        matching=m.weights,
    )
    return m, report
