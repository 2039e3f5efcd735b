"""Seeded experiment runs and report emission."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import fractional, integral
from .assignment import solve_integral
from .baselines import KINDS, GreedyFractional, run_online
from .distributions import AdviceDistribution, GaussianMixture, QuantizerConfig, sample, uniform_over
from .instance import Instance, load_instance, random_instance
from .report import CSV_COLUMNS, RunReport
from .seeds import derive_seed

log = logging.getLogger(__name__)

ALGORITHMS = ("advice_fractional", "advice_integral", "greedy", "permutation", "greedy_fractional")
ADVICE_SOURCES = ("instance", "standard", "perfect")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One batch of trials.

    With ``instance`` set, servers (and requests, if present) come from the
    file; otherwise each trial draws N standard Gaussian servers in R^dim and
    requests shifted by ``shift``. Requests missing from a file are sampled
    from the file's advice. ``advice`` picks the advice given to the
    algorithm: the file's, a standard Gaussian, or the requests themselves.
    """

    algo: str = "advice_integral"
    baseline: str = "greedy"
    copies: int | None = None
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    trials: int = 1
    seed: int = 0
    instance: str | None = None
    n: int = 16
    dim: int = 1
    shift: float = 0.0
    advice: str = "standard"
    out: str | None = None
    format: str = "csv"
    timing: bool = False

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        if self.baseline not in KINDS:
            raise ConfigError(f"baseline must be one of {KINDS}, got {self.baseline!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.copies is not None and self.copies < 1:
            raise ConfigError(f"copies must be >= 1, got {self.copies}")
        if self.n < 1 or self.dim < 1:
            raise ConfigError("n and dim must be positive")
        if self.advice not in ADVICE_SOURCES:
            raise ConfigError(f"advice must be one of {ADVICE_SOURCES}, got {self.advice!r}")
        if self.advice == "instance" and self.instance is None:
            raise ConfigError("advice='instance' needs an instance file")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")


def _standard_gaussian(dim: int) -> GaussianMixture:
    return GaussianMixture(np.zeros((1, dim)), np.ones((1, dim)), np.ones(1))


def trial_instance(cfg: ExperimentConfig, trial: int, base: Instance | None = None) -> tuple[Instance, AdviceDistribution]:
    tseed = derive_seed(cfg.seed, trial)
    if base is not None:
        inst = base
        if inst.requests is None:
            if inst.advice is None:
                raise ConfigError("instance has neither requests nor advice to sample them from")
            inst = replace(inst, requests=sample(inst.advice, inst.n, derive_seed(tseed, 7)))
    else:
        rng = np.random.default_rng(derive_seed(tseed, 7))
        inst = random_instance(cfg.n, cfg.dim, rng, cfg.shift)
    if cfg.advice == "instance":
        advice = inst.advice
    elif cfg.advice == "perfect":
        advice = uniform_over(inst.requests)
    else:
        if inst.servers.ndim != 2:
            raise ConfigError("standard Gaussian advice needs a euclidean metric")
        advice = _standard_gaussian(inst.servers.shape[1])
    return inst, advice


def run_trial(cfg: ExperimentConfig, trial: int, base: Instance | None = None) -> RunReport:
    inst, advice = trial_instance(cfg, trial, base)
    t0 = time.perf_counter()
    tseed = derive_seed(cfg.seed, trial)
    space, S, R = inst.space, inst.servers, inst.requests
    if cfg.algo == "advice_fractional":
        copies = cfg.copies or fractional.default_copies(inst.n)
        _, rep = fractional.run(S, advice, R, fractional.BlowupConfig(copies, tseed),
                                cfg.baseline, space)
    elif cfg.algo == "advice_integral":
        _, rep = integral.run(S, advice, R, space, cfg.baseline, tseed, cfg.quantizer)
    else:
        costs = space.pairwise(R, S)
        opt = solve_integral(costs).total_cost
        if cfg.algo == "greedy_fractional":
            g = GreedyFractional(S, space)
            w = np.array([g.serve(r) for r in R])
            rep = RunReport(cfg.algo, inst.n, tseed, float((w * costs).sum()), opt, matching=w)
        else:
            m = run_online(cfg.algo, S, R, space, tseed)
            rep = RunReport(cfg.algo, inst.n, tseed, m.total_cost, opt, matching=m.pairing)
    ms = 1000 * (time.perf_counter() - t0) if cfg.timing else 0.0
    return replace(rep, seed=cfg.seed, trial=trial, ms=ms)


def run_experiment(cfg: ExperimentConfig) -> list[RunReport]:
    """All trials in trial order; a failing trial yields a report with ``error`` set."""
    base = load_instance(cfg.instance)[0] if cfg.instance else None
    reports = []
    for trial in range(cfg.trials):
        try:
            reports.append(run_trial(cfg, trial, base))
        except Exception as e:  # noqa: BLE001 - isolate per-trial failures
            log.warning("trial %d failed: %s", trial, e)
            n = base.n if base is not None else cfg.n
            reports.append(RunReport(cfg.algo, n, cfg.seed, float("nan"), float("nan"),
                                     trial=trial, error=f"{type(e).__name__}: {e}"))
    return reports


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(reports: Sequence[RunReport], fmt: str = "csv") -> str:
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            row = r.row()
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        # NaN and Infinity use the stdlib's JSON extensions and load back unchanged
        return json.dumps([r.to_json() for r in reports], indent=1, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(reports: Sequence[RunReport], fmt: str = "csv", path=None) -> str:
    """Write reports to ``path`` (or return the text when path is None)."""
    text = render(reports, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_reports(path) -> list[RunReport]:
    return [RunReport.from_json(d) for d in json.loads(Path(path).read_text())]
