"""Per-run measurement record shared by algorithms and the harness."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

CSV_COLUMNS = (
    "algo", "N", "seed", "trial", "actual_cost", "opt_cost", "ratio", "eta_hat",
    "residual_w1", "online_cost", "offline_cost", "beta_emp", "ms",
)


def competitive_ratio(cost: float, opt: float, tol: float = 1e-9) -> float:
    if opt > tol:
        return cost / opt
    return 1.0 if cost <= tol else math.inf


@dataclass
class RunReport:
    """Costs of one run.

    ``online_cost`` and ``offline_cost`` are the two decomposition terms,
    already divided by the blow-up factor for fractional runs, so
    ``actual_cost <= online_cost + offline_cost`` holds for both algorithms.
    """

    algo: str
    N: int
    seed: int
    actual_cost: float
    opt_cost: float
    trial: int = 0
    eta_hat: float = math.nan
    residual_w1: float = math.nan
    online_cost: float = math.nan
    offline_cost: float = math.nan
    beta_emp: float = math.nan
    ms: float = 0.0
    proxy_size: int = 0
    copies: int = 1
    error: str = ""
    matching: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def ratio(self) -> float:
        return competitive_ratio(self.actual_cost, self.opt_cost)

    @property
    def decomposition_bound(self) -> float:
        return self.online_cost + self.offline_cost

    def eta_bound(self, beta: float | None = None) -> float:
        """beta * N * (eta_hat + residual) + OPT, with beta defaulting to beta_emp."""
        b = self.beta_emp if beta is None else beta
        return b * self.N * (self.eta_hat + self.residual_w1) + self.opt_cost

    def row(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "matching"}
        d["ratio"] = self.ratio
        return {k: d[k] for k in CSV_COLUMNS}

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("matching")
        d["ratio"] = self.ratio
        if self.matching is not None:
            d["matching"] = np.asarray(self.matching).tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunReport":
        d = dict(d)
        d.pop("ratio", None)
        m = d.pop("matching", None)
        return cls(**d, matching=None if m is None else np.asarray(m))
