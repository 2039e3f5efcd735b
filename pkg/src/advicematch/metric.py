"""Metric spaces and point handling.

Point collections are numpy arrays throughout: Euclidean points are float
arrays of shape ``(n, d)``; points of a discrete or explicit metric are
integer labels of shape ``(n,)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np

Point = Union[tuple, int]

TRIANGLE_TOL = 1e-9


class MetricError(ValueError):
    """Raised on malformed points or metric tables."""


class MetricSpace:
    kind: str = ""

    def points(self, data: Any) -> np.ndarray:
        raise NotImplementedError

    def point(self, p: Any) -> np.ndarray:
        """Validate a single point; returns a 1-element collection's row."""
        return self.points([p])[0]

    def pairwise(self, a: Any, b: Any) -> np.ndarray:
        raise NotImplementedError

    def distance(self, a: Any, b: Any) -> float:
        return float(self.distances_from(a, self.one(b))[0])

    def one(self, p: Any) -> np.ndarray:
        """A single point as a collection of length one."""
        raise NotImplementedError

    def distances_from(self, p: Any, pts: Any) -> np.ndarray:
        return self.pairwise(self.one(p), pts)[0]

    def key(self, p: Any) -> Point:
        """Hashable representation of a single point (exact equality)."""
        raise NotImplementedError

    def to_json(self) -> Any:
        raise NotImplementedError

    def scale_points(self, pts: np.ndarray, c: float) -> np.ndarray:
        raise MetricError(f"{self.kind} metric has no scaling")


@dataclass(frozen=True)
class Euclidean(MetricSpace):
    dim: int
    kind: str = field(default="euclidean", init=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise MetricError(f"euclidean dimension must be a positive integer, got {self.dim!r}")

    def points(self, data):
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 1 and self.dim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim == 0 and self.dim == 1:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise MetricError(
                f"dimension mismatch: expected points in R^{self.dim}, got array of shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise MetricError("coordinates must be finite")
        return arr

    def point(self, p):
        arr = np.asarray(p, dtype=float).reshape(-1)
        return self.points(arr.reshape(1, -1))[0]

    def one(self, p):
        return self.point(p)[None, :]

    def pairwise(self, a, b):
        A, B = self.points(a), self.points(b)
        if self.dim == 1:
            return np.abs(A[:, 0][:, None] - B[:, 0][None, :])
        diff = A[:, None, :] - B[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def key(self, p):
        return tuple(float(x) for x in np.asarray(p, dtype=float).reshape(-1))

    def to_json(self):
        return {"euclidean": self.dim}

    def scale_points(self, pts, c):
        return self.points(pts) * c


class _Labelled(MetricSpace):
    def points(self, data):
        arr = np.asarray(data)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if arr.ndim != 1:
            raise MetricError(f"{self.kind} metric points are integer labels, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            as_int = arr.astype(np.int64)
            if not np.array_equal(as_int, arr):
                raise MetricError(f"{self.kind} metric points must be integer labels")
            arr = as_int
        return arr.astype(np.int64)

    def point(self, p):
        arr = np.asarray(p).reshape(-1)
        if arr.size != 1:
            raise MetricError(f"{self.kind} metric point must be a single label, got {p!r}")
        return self.points(arr)[0]

    def one(self, p):
        return self.points(np.asarray(p).reshape(-1))

    def key(self, p):
        return int(np.asarray(p).reshape(-1)[0]) if np.ndim(p) else int(p)


@dataclass(frozen=True)
class Discrete(_Labelled):
    """dist(i, j) = 1 for distinct labels, 0 otherwise."""

    kind: str = field(default="discrete", init=False)

    def pairwise(self, a, b):
        A, B = self.points(a), self.points(b)
        return (A[:, None] != B[None, :]).astype(float)

    def to_json(self):
        return "discrete"


@dataclass(frozen=True, eq=False)
class Explicit(_Labelled):
    """Finite metric given by a distance table over labels ``0..n-1``."""

    table: np.ndarray
    kind: str = field(default="explicit", init=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise MetricError("explicit metric table must be a nonempty square matrix")
        if not np.all(np.isfinite(t)):
            raise MetricError("explicit metric table entries must be finite")
        if np.any(t < 0):
            i, j = np.argwhere(t < 0)[0]
            raise MetricError(f"negative distance at ({i}, {j})")
        if np.any(np.diag(t) != 0):
            i = int(np.flatnonzero(np.diag(t) != 0)[0])
            raise MetricError(f"nonzero diagonal at ({i}, {i})")
        if not np.array_equal(t, t.T):
            i, j = np.argwhere(t != t.T)[0]
            raise MetricError(f"asymmetric table at ({i}, {j})")
        # dist(i,k) <= dist(i,j) + dist(j,k) for every j, O(n^3)
        n = t.shape[0]
        for j in range(n):
            viol = t > t[:, j][:, None] + t[j, :][None, :] + TRIANGLE_TOL
            if viol.any():
                i, k = np.argwhere(viol)[0]
                raise MetricError(
                    f"triangle inequality violated for triple ({i}, {j}, {k}): "
                    f"d({i},{k})={t[i, k]} > d({i},{j})+d({j},{k})={t[i, j] + t[j, k]}"
                )
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def points(self, data):
        arr = super().points(data)
        if arr.size and (arr.min() < 0 or arr.max() >= self.size):
            bad = arr[(arr < 0) | (arr >= self.size)][0]
            raise MetricError(f"unknown label {int(bad)} for explicit metric of size {self.size}")
        return arr

    def pairwise(self, a, b):
        A, B = self.points(a), self.points(b)
        return self.table[np.ix_(A, B)]

    def to_json(self):
        return {"explicit": self.table.tolist()}

    def __eq__(self, other):
        return isinstance(other, Explicit) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())


def metric_from_json(obj: Any) -> MetricSpace:
    if obj == "discrete":
        return Discrete()
    if isinstance(obj, dict) and len(obj) == 1:
        (k, v), = obj.items()
        if k == "euclidean":
            if not isinstance(v, int) or isinstance(v, bool):
                raise MetricError(f"metric.euclidean must be a positive integer, got {v!r}")
            return Euclidean(v)
        if k == "explicit":
            return Explicit(np.asarray(v, dtype=float))
    raise MetricError(f"unrecognised metric specification: {obj!r}")


def distance(space: MetricSpace, a: Any, b: Any) -> float:
    return space.distance(a, b)


def unique_points(space: MetricSpace, pts: np.ndarray):
    """Distinct locations of a point collection.

    Returns ``(locations, inverse, counts)`` with locations in order of first
    appearance, so ``locations[inverse] == pts``.
    """
    pts = space.points(pts)
    axis = 0 if pts.ndim == 2 else None
    uniq, first, inverse, counts = np.unique(
        pts, axis=axis, return_index=True, return_inverse=True, return_counts=True
    )
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return uniq[order], rank[np.asarray(inverse).reshape(-1)], counts[order]


def points_to_json(space: MetricSpace, pts: Sequence) -> list:
    pts = space.points(pts)
    if isinstance(space, Euclidean):
        return [[float(x) for x in row] for row in pts]
    return [int(x) for x in pts]
