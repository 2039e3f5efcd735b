"""Matching instances and their JSON file format.

An instance file is one JSON object::

    {"metric": {"euclidean": 1} | "discrete" | {"explicit": [[...]]},
     "servers": [...], "requests": [...], "advice": {<variant>: {...}}}

``requests`` and ``advice`` are optional; ``servers`` must be nonempty.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .distributions import AdviceDistribution, DistributionError, advice_from_json
from .metric import Euclidean, MetricError, MetricSpace, metric_from_json, points_to_json


class SchemaError(ValueError):
    """Instance file does not match the expected layout."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


@dataclass
class Instance:
    space: MetricSpace
    servers: np.ndarray
    requests: np.ndarray | None = None
    advice: AdviceDistribution | None = None

    def __post_init__(self):
        self.servers = self.space.points(self.servers)
        if self.requests is not None:
            self.requests = self.space.points(self.requests)

    @property
    def n(self) -> int:
        return self.servers.shape[0]

    def costs(self) -> np.ndarray:
        """Request-by-server distance matrix."""
        if self.requests is None:
            raise SchemaError("requests", "instance has no requests")
        return self.space.pairwise(self.requests, self.servers)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "metric": self.space.to_json(),
            "servers": points_to_json(self.space, self.servers),
        }
        if self.requests is not None:
            out["requests"] = points_to_json(self.space, self.requests)
        if self.advice is not None:
            out["advice"] = self.advice.to_json(self.space)
        return out


def _field(fn, name: str, *args):
    try:
        return fn(*args)
    except SchemaError:
        raise
    except MetricError as e:
        # triangle violations and malformed metrics keep their own type
        if name == "metric":
            raise
        raise SchemaError(name, str(e)) from e
    except (DistributionError, KeyError, TypeError, ValueError) as e:
        raise SchemaError(name, str(e) or type(e).__name__) from e


def instance_from_json(obj: Any) -> Instance:
    if not isinstance(obj, dict):
        raise SchemaError("<root>", "instance must be a JSON object")
    unknown = set(obj) - {"metric", "servers", "requests", "advice"}
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")
    for name in ("metric", "servers"):
        if name not in obj:
            raise SchemaError(name, "missing required field")
    space = _field(metric_from_json, "metric", obj["metric"])
    if not isinstance(obj["servers"], list) or not obj["servers"]:
        raise SchemaError("servers", "must be a nonempty list")
    servers = _field(space.points, "servers", obj["servers"])
    requests = None
    if "requests" in obj:
        if not isinstance(obj["requests"], list):
            raise SchemaError("requests", "must be a list")
        requests = _field(space.points, "requests", obj["requests"]) if obj["requests"] else None
        if requests is not None and requests.shape[0] != servers.shape[0]:
            raise SchemaError(
                "requests", f"{requests.shape[0]} requests for {servers.shape[0]} servers")
    advice = None
    if obj.get("advice") is not None:
        advice = _field(advice_from_json, "advice", obj["advice"], space)
    return Instance(space, servers, requests, advice)


def load_instance(path) -> tuple[Instance, AdviceDistribution | None]:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("<root>", f"invalid JSON: {e}") from e
    inst = instance_from_json(obj)
    return inst, inst.advice


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=1) + "\n")


def random_instance(n: int, dim: int, rng: np.random.Generator, shift: float = 0.0) -> Instance:
    """Gaussian servers and requests in R^dim; requests offset by ``shift``."""
    return Instance(Euclidean(dim), rng.standard_normal((n, dim)),
                    rng.standard_normal((n, dim)) + shift)
