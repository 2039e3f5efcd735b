"""Advice distributions, empirical measures, W1 distance and N-quantization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .assignment import solve_transport
from .metric import Euclidean, MetricError, MetricSpace

MASS_TOL = 1e-9


class DistributionError(ValueError):
    pass


def _dedupe(atoms: np.ndarray):
    axis = 0 if atoms.ndim == 2 else None
    uniq, first, inverse = np.unique(atoms, axis=axis, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return uniq[order], rank[np.asarray(inverse).reshape(-1)]


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely supported probability measure.

    ``counts`` is kept when the measure is an empirical one (integer
    multiplicities over ``total`` points), so W1 can be solved with integer
    masses.
    """

    atoms: np.ndarray
    masses: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms)
        masses = np.asarray(self.masses, dtype=float).ravel()
        if atoms.shape[0] == 0:
            raise DistributionError("distribution needs at least one atom")
        if atoms.shape[0] != masses.size:
            raise DistributionError(f"{atoms.shape[0]} atoms but {masses.size} masses")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise DistributionError("masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise DistributionError(f"masses sum to {masses.sum()}, expected 1")
        counts = None if self.counts is None else np.asarray(self.counts, dtype=np.int64)
        keep = masses > 0
        atoms, masses = atoms[keep], masses[keep]
        if counts is not None:
            counts = counts[keep]
        uniq, inv = _dedupe(atoms)
        if uniq.shape[0] != atoms.shape[0]:
            masses = np.bincount(inv, weights=masses, minlength=uniq.shape[0])
            if counts is not None:
                counts = np.bincount(inv, weights=counts, minlength=uniq.shape[0]).astype(np.int64)
        masses = masses / masses.sum()
        object.__setattr__(self, "atoms", uniq)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.masses.size

    @property
    def total(self) -> int | None:
        return None if self.counts is None else int(self.counts.sum())

    def _canonical(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.atoms.reshape(self.atoms.shape[0], -1)
        order = np.lexsort(a.T[::-1])
        return a[order], self.masses[order]

    def same_as(self, other: "DiscreteDistribution", tol: float = MASS_TOL) -> bool:
        """Equal atoms (exactly) and equal masses (within ``tol``)."""
        if self.atoms.shape != other.atoms.shape:
            return False
        (a, w), (b, v) = self._canonical(), other._canonical()
        return bool(np.array_equal(a, b) and np.all(np.abs(w - v) <= tol))


class AdviceDistribution:
    """A sampleable prediction of where requests will arrive."""

    is_finite = False

    def sample(self, k: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def to_json(self, space: MetricSpace) -> dict:
        raise NotImplementedError

    def check_space(self, space: MetricSpace) -> None:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FiniteAtoms(AdviceDistribution):
    dist: DiscreteDistribution
    is_finite = True

    def sample(self, k, rng):
        idx = rng.choice(len(self.dist), size=k, p=self.dist.masses)
        return self.dist.atoms[idx]

    def to_json(self, space):
        from .metric import points_to_json

        return {"finite_atoms": {
            "atoms": points_to_json(space, self.dist.atoms),
            "masses": [float(w) for w in self.dist.masses],
        }}

    def check_space(self, space):
        space.points(self.dist.atoms)


def _euclidean_only(space: MetricSpace, what: str) -> None:
    if not isinstance(space, Euclidean):
        raise MetricError(f"{what} advice requires a euclidean metric, got {space.kind}")


@dataclass(frozen=True, eq=False)
class GaussianMixture(AdviceDistribution):
    """Axis-aligned Gaussian mixture: ``means`` and ``stds`` are (k, d)."""

    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        stds = np.atleast_2d(np.asarray(self.stds, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if means.shape != stds.shape or means.shape[0] != weights.size:
            raise DistributionError("mixture means, stds and weights disagree in shape")
        if np.any(stds <= 0) or np.any(weights <= 0):
            raise DistributionError("mixture stds and weights must be positive")
        if abs(weights.sum() - 1.0) > MASS_TOL:
            raise DistributionError(f"mixture weights sum to {weights.sum()}, expected 1")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "weights", weights / weights.sum())

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def sample(self, k, rng):
        comp = rng.choice(self.weights.size, size=k, p=self.weights)
        z = rng.standard_normal((k, self.dim))
        return self.means[comp] + z * self.stds[comp]

    def to_json(self, space):
        return {"gaussian_mixture": {"components": [
            {"mean": m.tolist(), "std": s.tolist(), "weight": float(w)}
            for m, s, w in zip(self.means, self.stds, self.weights)
        ]}}

    def check_space(self, space):
        _euclidean_only(space, "gaussian_mixture")
        if space.dim != self.dim:
            raise MetricError(f"advice dimension {self.dim} != metric dimension {space.dim}")


@dataclass(frozen=True, eq=False)
class UniformBox(AdviceDistribution):
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.asarray(self.low, dtype=float).ravel()
        high = np.asarray(self.high, dtype=float).ravel()
        if low.shape != high.shape or np.any(low > high):
            raise DistributionError("uniform box needs low <= high coordinatewise")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return self.low.size

    def sample(self, k, rng):
        return self.low + rng.random((k, self.dim)) * (self.high - self.low)

    def to_json(self, space):
        return {"uniform_box": {"low": self.low.tolist(), "high": self.high.tolist()}}

    def check_space(self, space):
        _euclidean_only(space, "uniform_box")
        if space.dim != self.dim:
            raise MetricError(f"advice dimension {self.dim} != metric dimension {space.dim}")


def advice_from_json(obj: Any, space: MetricSpace) -> AdviceDistribution:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise DistributionError("advice must be an object with exactly one variant key")
    (tag, body), = obj.items()
    if tag == "finite_atoms":
        adv = FiniteAtoms(DiscreteDistribution(space.points(body["atoms"]), body["masses"]))
    elif tag == "gaussian_mixture":
        comps = body["components"]
        if not comps:
            raise DistributionError("gaussian_mixture needs at least one component")
        adv = GaussianMixture(
            [c["mean"] for c in comps], [c["std"] for c in comps], [c["weight"] for c in comps]
        )
    elif tag == "uniform_box":
        adv = UniformBox(body["low"], body["high"])
    else:
        raise DistributionError(f"unknown advice variant {tag!r}")
    adv.check_space(space)
    return adv


def uniform_over(points: np.ndarray) -> FiniteAtoms:
    """Finite advice putting equal mass on each listed point (duplicates add up)."""
    return FiniteAtoms(empirical(points))


# ---------------------------------------------------------------------------


def sample(advice: AdviceDistribution, k: int, seed: int) -> np.ndarray:
    if k < 1:
        raise DistributionError(f"sample size must be positive, got {k}")
    return advice.sample(int(k), np.random.default_rng(seed))


def empirical(points) -> DiscreteDistribution:
    pts = np.asarray(points)
    if pts.shape[0] == 0:
        raise DistributionError("empirical measure of an empty point set")
    n = pts.shape[0]
    return DiscreteDistribution(pts, np.full(n, 1.0 / n), np.ones(n, dtype=np.int64))


def wasserstein1(mu: DiscreteDistribution, nu: DiscreteDistribution, space: MetricSpace,
                 method: str = "auto") -> float:
    """Exact W1 between finitely supported measures, by min-cost transport.

    Counted measures are transported with integer masses scaled to a common
    total, which lets the solver take its exact assignment route. ``method``
    is forwarded to :func:`solve_transport`; ``"line"`` uses the 1-D formula
    and ``"auto"`` picks it for one-dimensional Euclidean spaces.
    """
    space.points(mu.atoms)
    space.points(nu.atoms)
    if method == "line" or (method == "auto" and isinstance(space, Euclidean) and space.dim == 1):
        return w1_line_exact(mu, nu)
    cost = space.pairwise(mu.atoms, nu.atoms)
    if mu.counts is not None and nu.counts is not None:
        L = math.lcm(mu.total, nu.total)
        plan = solve_transport(mu.counts * (L // mu.total), nu.counts * (L // nu.total), cost, method)
        return plan.total_cost / L
    return solve_transport(mu.masses, nu.masses, cost, method).total_cost


def w1_multisets(x, y, space: MetricSpace) -> float:
    """W1 between the empirical measures of two point multisets."""
    return wasserstein1(empirical(space.points(x)), empirical(space.points(y)), space)


def w1_line_exact(mu: DiscreteDistribution, nu: DiscreteDistribution) -> float:
    """1-D W1 as the integral of |F_mu - F_nu| over the merged support."""
    a, b = np.asarray(mu.atoms), np.asarray(nu.atoms)
    for arr in (a, b):
        if not (arr.ndim == 1 or (arr.ndim == 2 and arr.shape[1] == 1)):
            raise DistributionError(f"w1_line_exact needs one-dimensional atoms, got shape {arr.shape}")
    a, b = a.astype(float).ravel(), b.astype(float).ravel()
    xs = np.concatenate([a, b])
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    jumps = np.concatenate([mu.masses, -nu.masses])[order]
    gap = np.cumsum(jumps)[:-1]
    return float(np.sum(np.abs(gap) * np.diff(xs)))


def advice_proxy(advice: AdviceDistribution, resolution: int, seed: int) -> DiscreteDistribution:
    """The advice itself when finite, else the empirical measure of ``resolution`` draws."""
    if advice.is_finite:
        return advice.dist
    return empirical(sample(advice, resolution, seed))


def eta(advice: AdviceDistribution, requests, space: MetricSpace, resolution: int,
        seed: int) -> float:
    """Advice error W1(advice, empirical(requests)).

    Exact for finite advice; for continuous advice W1 is taken against an
    empirical proxy of ``resolution`` samples.
    """
    req = space.points(requests)
    if req.shape[0] == 0:
        raise DistributionError("eta needs at least one request")
    if not advice.is_finite and resolution < req.shape[0]:
        raise DistributionError(
            f"resolution {resolution} is smaller than the number of requests {req.shape[0]}"
        )
    return wasserstein1(advice_proxy(advice, resolution, seed), empirical(req), space)


# --- quantization ------------------------------------------------------------


@dataclass(frozen=True)
class QuantizerConfig:
    proxy_size: int = 4096
    restarts: int = 4
    lloyd_iter: int = 50
    lloyd_tol: float = 1e-5
    weiszfeld_iter: int = 20
    weiszfeld_tol: float = 1e-7
    exhaustive_limit: int = 20000


@dataclass(frozen=True)
class QuantizerResult:
    centers: np.ndarray
    multiplicities: np.ndarray
    residual_w1: float
    cell_masses: np.ndarray = field(repr=False)
    proxy_size: int = 0
    exact: bool = False

    @property
    def n(self) -> int:
        return int(self.multiplicities.sum())

    def slots(self) -> np.ndarray:
        """The quantized multiset, one row per slot."""
        return np.repeat(self.centers, self.multiplicities, axis=0)


def largest_remainder(masses, n: int) -> np.ndarray:
    """Round ``masses * n`` to integers summing to n (Hamilton); ties go to lower index."""
    q = np.asarray(masses, dtype=float) * n / np.sum(masses)
    base = np.floor(q + 1e-12).astype(np.int64)
    frac = np.where(q - base > 0, q - base, 0.0)
    short = n - int(base.sum())
    if short > 0:
        order = np.lexsort((np.arange(q.size), -np.round(frac, 12)))
        base[order[:short]] += 1
    elif short < 0:
        order = np.lexsort((np.arange(q.size), np.round(frac, 12)))
        for i in order:
            if short == 0:
                break
            if base[i] > 0:
                base[i] -= 1
                short += 1
    return base


def _at_least_one(masses: np.ndarray, n: int) -> np.ndarray:
    """Largest remainder with every atom kept; needs len(masses) <= n."""
    m = masses.size
    excess = np.maximum(masses * n - 1.0, 0.0)
    if n == m or excess.sum() <= 0:
        return np.ones(m, dtype=np.int64) + (largest_remainder(np.ones(m), n - m) if n > m else 0)
    return 1 + largest_remainder(excess, n - m)


def _kmedoids_cost(dmat: np.ndarray, w: np.ndarray, centers) -> float:
    return float(w @ dmat[:, list(centers)].min(axis=1))


def _best_subset(dmat: np.ndarray, w: np.ndarray, n: int, limit: int, restarts: int,
                 rng: np.random.Generator):
    m = dmat.shape[0]
    if math.comb(m, n) <= limit:
        best, best_cost = None, np.inf
        combos = np.array(list(combinations(range(m), n)), dtype=np.int64)
        for chunk in np.array_split(combos, max(1, combos.shape[0] // 2048)):
            costs = (dmat[:, chunk].min(axis=2) * w[:, None]).sum(axis=0)
            k = int(costs.argmin())
            if costs[k] < best_cost - 1e-15:
                best, best_cost = chunk[k], costs[k]
        return sorted(best.tolist()), True
    # PAM-style swap search from seeded starts
    best, best_cost = None, np.inf
    for _ in range(restarts):
        cur = list(_seed_centers(dmat, w, n, rng))
        cost = _kmedoids_cost(dmat, w, cur)
        improved = True
        while improved:
            improved = False
            for pos in range(n):
                for cand in range(m):
                    if cand in cur:
                        continue
                    trial = cur[:pos] + [cand] + cur[pos + 1:]
                    tc = _kmedoids_cost(dmat, w, trial)
                    if tc < cost - 1e-12:
                        cur, cost, improved = trial, tc, True
        if cost < best_cost - 1e-15:
            best, best_cost = sorted(cur), cost
    return best, False


def _seed_centers(dmat, w, n, rng):
    """k-median++ seeding over the rows of a distance matrix (D^1 weighting)."""
    m = dmat.shape[0]
    first = int(rng.choice(m, p=w / w.sum()))
    chosen = [first]
    near = dmat[:, first].copy()
    while len(chosen) < n:
        p = w * near
        if p.sum() <= 0:
            rest = [i for i in range(m) if i not in chosen]
            chosen.append(int(rng.choice(rest)))
        else:
            chosen.append(int(rng.choice(m, p=p / p.sum())))
        near = np.minimum(near, dmat[:, chosen[-1]])
    return chosen


def _update_centers(x, w, labels, centers, cfg: QuantizerConfig):
    """Weighted geometric median of every cluster (Vardi-Zhang modified Weiszfeld)."""
    k, d = centers.shape
    new = centers.copy()
    for _ in range(cfg.weiszfeld_iter):
        diff = x - new[labels]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        at = dist <= 1e-12
        inv = np.where(at, 0.0, w / np.where(at, 1.0, dist))
        den = np.bincount(labels, weights=inv, minlength=k)
        num = np.stack([np.bincount(labels, weights=inv * x[:, j], minlength=k) for j in range(d)], 1)
        eta = np.bincount(labels, weights=np.where(at, w, 0.0), minlength=k)
        safe = np.where(den > 0, den, 1.0)[:, None]
        t = np.where(den[:, None] > 0, num / safe, new)
        # a center sitting on data points moves only if the pull of the rest beats their weight
        r = np.linalg.norm(num - den[:, None] * new, axis=1)
        gamma = np.where(eta > 0, np.minimum(1.0, eta / np.where(r > 0, r, 1.0)), 0.0)
        gamma = np.where((eta > 0) & (r <= 0), 1.0, gamma)
        upd = (1 - gamma)[:, None] * t + gamma[:, None] * new
        moved = np.max(np.abs(upd - new)) if k else 0.0
        new = upd
        if moved < cfg.weiszfeld_tol:
            break
    return new


def _lloyd_line(xs: np.ndarray, centers: np.ndarray, iters: int) -> tuple[np.ndarray, float]:
    """Lloyd k-median on sorted 1-D data with unit weights: cells are contiguous runs."""
    c = np.sort(centers)
    m = xs.size
    cum = np.concatenate([[0.0], np.cumsum(xs)])
    for _ in range(iters):
        cuts = np.searchsorted(xs, 0.5 * (c[1:] + c[:-1]))
        lo = np.concatenate([[0], cuts])
        hi = np.concatenate([cuts, [m]])
        full = hi > lo
        med = xs[np.minimum((lo + hi - 1) // 2, m - 1)]
        new = np.where(full, med, c)
        if np.array_equal(new, c):
            break
        c = np.sort(new)
    cuts = np.searchsorted(xs, 0.5 * (c[1:] + c[:-1]))
    lo, hi = np.concatenate([[0], cuts]), np.concatenate([cuts, [m]])
    # sum |x - c| over each run via prefix sums
    split = np.clip(np.searchsorted(xs, c), lo, hi)
    left = c * (split - lo) - (cum[split] - cum[lo])
    right = (cum[hi] - cum[split]) - c * (hi - split)
    return c[:, None], float((left + right).sum() / m)


def _kmedian_continuous(x: np.ndarray, n: int, space: Euclidean, cfg: QuantizerConfig,
                        rng: np.random.Generator) -> np.ndarray:
    w = np.full(x.shape[0], 1.0 / x.shape[0])
    xs = np.sort(x[:, 0]) if x.shape[1] == 1 else None
    best, best_cost = None, np.inf
    for _ in range(cfg.restarts):
        # seeding on a subsample keeps the O(M^2) distance matrix small
        sub = rng.choice(x.shape[0], size=min(x.shape[0], 1024), replace=False)
        centers = x[sub][_seed_centers(space.pairwise(x[sub], x[sub]), w[sub], n, rng)]
        if xs is not None:
            centers, cost = _lloyd_line(xs, centers[:, 0], cfg.lloyd_iter)
            if cost < best_cost:
                best, best_cost = centers, cost
            continue
        prev = np.inf
        for _ in range(cfg.lloyd_iter):
            d = space.pairwise(x, centers)
            labels = d.argmin(axis=1)
            cost = float(w @ d[np.arange(x.shape[0]), labels])
            if cost > prev * (1 - cfg.lloyd_tol):
                break
            prev = cost
            centers = _update_centers(x, w, labels, centers, cfg)
        cost = float(w @ space.pairwise(x, centers).min(axis=1))
        if cost < best_cost:
            best, best_cost = centers, cost
    return best


def quantize(advice: AdviceDistribution, n: int, params: QuantizerConfig | None = None,
             seed: int = 0, space: MetricSpace | None = None) -> QuantizerResult:
    """N-quantizer of the advice: at most ``n`` centers with integer multiplicities summing to n."""
    cfg = params or QuantizerConfig()
    if n < 1:
        raise DistributionError(f"quantizer size must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if advice.is_finite:
        dist = advice.dist
        if space is None:
            space = Euclidean(dist.atoms.shape[1]) if dist.atoms.ndim == 2 else None
            if space is None:
                raise DistributionError("label-valued advice needs an explicit metric space")
        if len(dist) <= n:
            mult = _at_least_one(dist.masses, n)
            return QuantizerResult(dist.atoms.copy(), mult, 0.0, dist.masses.copy(), 0, True)
        dmat = space.pairwise(dist.atoms, dist.atoms)
        idx, exact = _best_subset(dmat, dist.masses, n, cfg.exhaustive_limit, cfg.restarts, rng)
        centers = dist.atoms[idx]
        near = dmat[:, idx]
        labels = near.argmin(axis=1)
        residual = float(dist.masses @ near.min(axis=1))
        cells = np.bincount(labels, weights=dist.masses, minlength=n)
        proxy = 0
    else:
        if space is None:
            space = Euclidean(advice.dim)
        x = sample(advice, cfg.proxy_size, seed)
        centers = _kmedian_continuous(x, n, space, cfg, rng)
        centers, inv = _dedupe(centers)
        near = space.pairwise(x, centers)
        labels = near.argmin(axis=1)
        residual = float(near.min(axis=1).mean())
        cells = np.bincount(labels, minlength=centers.shape[0]) / x.shape[0]
        proxy, exact = x.shape[0], False
    mult = largest_remainder(cells, n)
    keep = mult > 0
    return QuantizerResult(centers[keep], mult[keep], residual, cells[keep], proxy, exact)
