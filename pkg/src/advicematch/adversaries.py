"""Lower-bound constructions: the adaptive harmonic adversary and the exponential-gap instance."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .assignment import solve_fractional, solve_integral
from .instance import Instance
from .metric import Discrete, Euclidean
from .report import RunReport, competitive_ratio
from .seeds import derive_seed

COLUMN_TOL = 1e-9


class AdversaryError(ValueError):
    pass


class FractionalOnline(Protocol):
    """Anything that answers a request with a row of server weights."""

    def serve(self, request) -> np.ndarray: ...


def harmonic_bound(n: int) -> float:
    """1 + sum_{i=2}^{n} 1/(n - i + 2)."""
    if n < 1:
        raise AdversaryError(f"n must be positive, got {n}")
    return 1.0 + sum(1.0 / (n - i + 2) for i in range(2, n + 1))


@dataclass
class AdaptiveAdversary:
    """Adaptive opponent on the discrete metric with servers labelled 0..n-1.

    ``capacity[s]`` is the mass already matched to server s, read from the
    algorithm's reported rows.
    """

    n: int
    capacity: np.ndarray = field(init=False)
    requested: np.ndarray = field(init=False)
    history: list = field(default_factory=list, init=False)

    def __post_init__(self):
        if self.n < 1:
            raise AdversaryError(f"n must be positive, got {self.n}")
        self.capacity = np.zeros(self.n)
        self.requested = np.zeros(self.n, dtype=bool)

    @property
    def servers(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def fresh(self) -> int:
        """A label that is not a server."""
        return self.n

    def record(self, row) -> None:
        row = np.asarray(row, dtype=float)
        if row.shape != (self.n,):
            raise AdversaryError(f"row has shape {row.shape}, expected ({self.n},)")
        self.capacity += row
        self.history.append(row)
        if np.any(self.capacity > 1 + COLUMN_TOL):
            s = int(np.argmax(self.capacity))
            raise AdversaryError(f"server {s} over capacity: {self.capacity[s]}")


def adversary_next(adv: AdaptiveAdversary, step: int) -> int:
    """Request label for ``step`` (1-based).

    Later requests go to the not-yet-requested server holding the most
    matched mass, ties to the lowest index.
    """
    if not 1 <= step <= adv.n:
        raise AdversaryError(f"step must lie in [1, {adv.n}], got {step}")
    if step == 1:
        return adv.fresh
    cap = np.where(adv.requested, -np.inf, adv.capacity)
    target = int(np.argmax(cap))
    adv.requested[target] = True
    return target


@dataclass
class GameResult:
    n: int
    requests: np.ndarray
    weights: np.ndarray
    cost: float
    opt: float

    @property
    def bound(self) -> float:
        return harmonic_bound(self.n)

    @property
    def ratio(self) -> float:
        return competitive_ratio(self.cost, self.opt)


def play(algorithm: FractionalOnline, n: int) -> GameResult:
    """Run the adaptive adversary for n steps against ``algorithm``."""
    adv = AdaptiveAdversary(n)
    space = Discrete()
    requests, rows, cost = [], [], 0.0
    for step in range(1, n + 1):
        r = adversary_next(adv, step)
        row = np.asarray(algorithm.serve(r), dtype=float)
        adv.record(row)
        cost += float(row @ space.distances_from(r, adv.servers))
        requests.append(r)
        rows.append(row)
    req = np.array(requests, dtype=np.int64)
    opt = solve_integral(space.pairwise(req, adv.servers)).total_cost
    return GameResult(n, req, np.array(rows), cost, opt)


class IntegralAsFractional:
    """One-hot rows from an integral online algorithm returning server indices."""

    def __init__(self, algorithm, n: int):
        self.algorithm, self.n = algorithm, n

    def serve(self, request) -> np.ndarray:
        row = np.zeros(self.n)
        row[self.algorithm.serve(request)] = 1.0
        return row


class ReplayAverage:
    """Expected rows of a randomized algorithm, estimated over seeded replays.

    ``factory(seed)`` builds one independent copy; every request is fed to all
    copies and the rows are averaged.
    """

    def __init__(self, factory: Callable[[int], FractionalOnline], replays: int = 200, seed: int = 0):
        if replays < 1:
            raise AdversaryError("need at least one replay")
        self.copies = [factory(derive_seed(seed, t)) for t in range(replays)]

    def serve(self, request) -> np.ndarray:
        return np.mean([c.serve(request) for c in self.copies], axis=0)


def game_report(result: GameResult, algo: str, seed: int = 0, trial: int = 0, ms: float = 0.0) -> RunReport:
    return RunReport(algo=algo, N=result.n, seed=seed, trial=trial,
                     actual_cost=result.cost, opt_cost=result.opt, ms=ms,
                     matching=result.weights)


# ---------------------------------------------------------------------------
# exponential gap


@dataclass
class ExponentialGapInstance(Instance):
    which: str = "R0"

    @property
    def advice_bit(self) -> int:
        return 0 if self.which == "R0" else 1


def _gap_requests(n: int, which: str) -> np.ndarray:
    r = [1.5] + [2.0 ** (i - 1) for i in range(2, n)]
    r.append(2.0 ** (n - 1) if which == "R0" else 1.0)
    return np.array(r)


def exponential_instance(n: int, which: str = "R0") -> ExponentialGapInstance:
    """Servers at 2^{i-1}; requests 3/2, 2, 4, ..., 2^{n-2}, then 2^{n-1} (R0) or 1 (R1)."""
    if int(n) != n or n < 2:
        raise AdversaryError(f"exponential instance needs n >= 2, got {n}")
    if which not in ("R0", "R1", 0, 1):
        raise AdversaryError(f"which must be R0 or R1, got {which!r}")
    which = {0: "R0", 1: "R1"}.get(which, which)
    servers = 2.0 ** np.arange(n)
    return ExponentialGapInstance(Euclidean(1), servers, _gap_requests(n, which), which=which)


def trusting_run(instance: ExponentialGapInstance, advice_bit: int, fractional: bool = False) -> RunReport:
    """Match request i exactly as the optimum of the advised request set matches it.

    The advised set agrees with reality on every request but the last, and
    the last request takes whatever is left, so the strategy is 1-consistent.
    """
    t0 = time.perf_counter()
    n = instance.n
    advised = exponential_instance(n, advice_bit)
    plan_costs = advised.costs()
    real_costs = instance.costs()
    if fractional:
        weights = solve_fractional(plan_costs).weights
    else:
        weights = solve_integral(plan_costs).as_weights()
    cost = float((weights * real_costs).sum())
    opt = solve_integral(real_costs).total_cost
    name = "trusting_fractional" if fractional else "trusting"
    return RunReport(
        algo=f"{name}:advice=R{advice_bit}:actual={instance.which}", N=n, seed=0,
        actual_cost=cost, opt_cost=opt, ms=1000 * (time.perf_counter() - t0),
        matching=weights,
    )
