"""Convergence of empirical measures in W1.

For d = 1 the distance between an empirical measure and the true law is
computed exactly from the CDF F and the partial expectation
G(x) = E[(x - X)^+], whose derivative is F. For d >= 2 the true law is
replaced by a reference sample ten times larger.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .distributions import (
    AdviceDistribution,
    DistributionError,
    FiniteAtoms,
    GaussianMixture,
    UniformBox,
    empirical,
    sample,
    wasserstein1,
)
from .metric import Euclidean
from .seeds import derive_seed

MAX_DIM = 3
REFERENCE_FACTOR = 10


def _phi(z):
    return np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi)


def cdf_1d(dist: AdviceDistribution, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if isinstance(dist, GaussianMixture):
        z = (x[..., None] - dist.means[:, 0]) / dist.stds[:, 0]
        return ndtr(z) @ dist.weights
    if isinstance(dist, UniformBox):
        a, b = dist.low[0], dist.high[0]
        return np.clip((x - a) / (b - a), 0.0, 1.0)
    if isinstance(dist, FiniteAtoms):
        atoms = dist.dist.atoms[:, 0]
        return (x[..., None] >= atoms).astype(float) @ dist.dist.masses
    raise DistributionError(f"no CDF for {type(dist).__name__}")


def partial_expectation(dist: AdviceDistribution, x: np.ndarray) -> np.ndarray:
    """G(x) = E[(x - X)^+]."""
    x = np.asarray(x, dtype=float)
    if isinstance(dist, GaussianMixture):
        m, s = dist.means[:, 0], dist.stds[:, 0]
        z = (x[..., None] - m) / s
        return (s * (z * ndtr(z) + _phi(z))) @ dist.weights
    if isinstance(dist, UniformBox):
        a, b = dist.low[0], dist.high[0]
        inside = (np.clip(x, a, b) - a) ** 2 / (2 * (b - a))
        return inside + np.maximum(x - b, 0.0)
    if isinstance(dist, FiniteAtoms):
        atoms = dist.dist.atoms[:, 0]
        return np.maximum(x[..., None] - atoms, 0.0) @ dist.dist.masses
    raise DistributionError(f"no partial expectation for {type(dist).__name__}")


def mean_1d(dist: AdviceDistribution) -> float:
    if isinstance(dist, GaussianMixture):
        return float(dist.weights @ dist.means[:, 0])
    if isinstance(dist, UniformBox):
        return float(0.5 * (dist.low[0] + dist.high[0]))
    if isinstance(dist, FiniteAtoms):
        return float(dist.dist.masses @ dist.dist.atoms[:, 0])
    raise DistributionError(f"no mean for {type(dist).__name__}")


def quantile_1d(dist: AdviceDistribution, u: np.ndarray, lo: float, hi: float,
                iters: int = 200) -> np.ndarray:
    """Smallest x in [lo, hi] with F(x) >= u, by vectorized bisection."""
    u = np.asarray(u, dtype=float)
    a, b = np.full(u.shape, lo), np.full(u.shape, hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        up = cdf_1d(dist, mid) >= u
        b = np.where(up, mid, b)
        a = np.where(up, a, mid)
        if np.all(b - a <= 1e-15 * np.maximum(1.0, np.abs(b))):
            break
    return b


def w1_empirical_exact(points, dist: AdviceDistribution) -> float:
    """Exact W1 between the empirical measure of 1-D points and ``dist``.

    Integrates |F_N - F| piecewise: on [x_(k), x_(k+1)] the empirical CDF is
    c = k/N and the crossing point q = F^{-1}(c), clipped to the interval,
    splits the integrand into two signed pieces expressed through G.
    """
    x = np.sort(np.asarray(points, dtype=float).reshape(-1))
    n = x.size
    if n == 0:
        raise DistributionError("need at least one point")
    G = lambda t: partial_expectation(dist, t)  # noqa: E731
    total = G(x[:1])[0] + (G(x[-1:])[0] - x[-1] + mean_1d(dist))
    if n > 1:
        a, b = x[:-1], x[1:]
        c = np.arange(1, n) / n
        q = np.clip(quantile_1d(dist, c, x[0], x[-1]), a, b)
        Ga, Gb, Gq = G(a), G(b), G(q)
        total += float(np.sum(c * (q - a) - (Gq - Ga) + (Gb - Gq) - c * (b - q)))
    return float(total)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    trials: int
    mean_w1: float
    std_w1: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    slope: float
    intercept: float
    dim: int
    exact: bool

    def to_csv(self) -> str:
        lines = ["N,trials,mean_w1,std_w1"]
        lines += [f"{r.N},{r.trials},{r.mean_w1!r},{r.std_w1!r}" for r in self.rows]
        return "\n".join(lines) + "\n"


def fit_loglog(sizes, values) -> tuple[float, float]:
    """Least-squares slope and intercept of log(values) against log(sizes)."""
    s, v = np.log(np.asarray(sizes, float)), np.asarray(values, float)
    if np.any(v <= 0):
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(s, np.log(v), 1)
    return float(slope), float(intercept)


def _dim(dist: AdviceDistribution) -> int:
    if isinstance(dist, FiniteAtoms):
        return dist.dist.atoms.shape[1] if dist.dist.atoms.ndim == 2 else 0
    return dist.dim


def convergence_benchmark(dist: AdviceDistribution, sizes, trials: int = 50,
                          seed: int = 0) -> ConvergenceTable:
    d = _dim(dist)
    if not 1 <= d <= MAX_DIM:
        raise DistributionError(f"convergence benchmark supports 1 <= d <= {MAX_DIM}, got d={d}")
    sizes = [int(n) for n in sizes]
    if not sizes or any(n < 1 for n in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DistributionError(f"sizes must be positive and strictly increasing, got {sizes}")
    if trials < 10:
        raise DistributionError(f"need at least 10 trials, got {trials}")
    space = Euclidean(d)
    rows = []
    for n in sizes:
        vals = np.empty(trials)
        for t in range(trials):
            x = sample(dist, n, derive_seed(seed, n, t))
            if d == 1:
                vals[t] = w1_empirical_exact(x, dist)
            else:
                ref = sample(dist, REFERENCE_FACTOR * n, derive_seed(seed, n, t, 1))
                vals[t] = wasserstein1(empirical(x), empirical(ref), space)
        rows.append(ConvergenceRow(n, trials, float(vals.mean()), float(vals.std(ddof=1))))
    slope, intercept = fit_loglog([r.N for r in rows], [r.mean_w1 for r in rows])
    return ConvergenceTable(rows, slope, intercept, d, d == 1)
