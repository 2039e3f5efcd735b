"""Command line entry point.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from .adversaries import (
    AdaptiveAdversary,
    AdversaryError,
    IntegralAsFractional,
    ReplayAverage,
    exponential_instance,
    game_report,
    play,
    trusting_run,
)
from .baselines import KINDS, GreedyFractional, OnlineMatcher
from .convergence import convergence_benchmark
from .distributions import DistributionError, GaussianMixture, UniformBox, uniform_over
from .experiment import ALGORITHMS, ADVICE_SOURCES, ConfigError, ExperimentConfig, emit, run_experiment
from .fractional import AdviceFractional, BlowupConfig, default_copies
from .instance import SchemaError, load_instance
from .metric import Discrete, MetricError
from .seeds import derive_seed

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
VALIDATION_ERRORS = (ConfigError, SchemaError, MetricError, DistributionError, AdversaryError)

GAME_ALGOS = ("greedy_fractional", "advice_fractional", "greedy", "permutation")
GAME_ADVICE = ("servers", "point", "fresh")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--timing", action="store_true", help="record wall time in the ms column")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="advicematch", description="Online metric matching with distributional advice.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run seeded trials of one algorithm")
    p.add_argument("--algo", choices=ALGORITHMS, default="advice_integral")
    p.add_argument("--baseline", choices=KINDS, default="greedy")
    p.add_argument("--copies", type=int, default=None, help="blow-up factor C (default min(N, 10^4/N))")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--instance", default=None, help="instance JSON file")
    p.add_argument("--n", type=int, default=16, help="generated instance size")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--shift", type=float, default=0.0, help="offset of generated requests")
    p.add_argument("--advice", choices=ADVICE_SOURCES, default="standard")
    _add_common(p)

    p = sub.add_parser("adversary", help="lower-bound games")
    p.add_argument("--game", choices=("harmonic", "gap"), default="harmonic")
    p.add_argument("--algo", choices=GAME_ALGOS, default="greedy_fractional")
    p.add_argument("--baseline", choices=KINDS, default="greedy")
    p.add_argument("--advice", choices=GAME_ADVICE, default="servers",
                   help="advice for advice_fractional: uniform on servers, one server, or a non-server point")
    p.add_argument("--copies", type=int, default=None)
    p.add_argument("--replays", type=int, default=1, help="seeded replays averaged per step")
    p.add_argument("--n", type=int, nargs="+", default=[4, 16, 64])
    p.add_argument("--trials", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("converge", help="empirical W1 convergence benchmark")
    p.add_argument("--dist", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--sizes", type=int, nargs="+", default=[2 ** k for k in range(6, 13)])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    return ap


def _game_algorithm(args, n: int):
    servers = np.arange(n)
    space = Discrete()
    if args.algo == "greedy_fractional":
        return lambda s: GreedyFractional(servers, space)
    if args.algo in KINDS:
        return lambda s: IntegralAsFractional(OnlineMatcher(args.algo, servers, space, s), n)
    advice = uniform_over({"servers": servers, "point": servers[:1], "fresh": np.array([n])}[args.advice])
    copies = args.copies or default_copies(n)
    return lambda s: AdviceFractional(servers, advice, space, BlowupConfig(copies, s), args.baseline)


def cmd_run(args) -> int:
    cfg = ExperimentConfig(
        algo=args.algo, baseline=args.baseline, copies=args.copies, trials=args.trials,
        seed=args.seed, instance=args.instance, n=args.n, dim=args.dim, shift=args.shift,
        advice=args.advice, out=args.out, format=args.format, timing=args.timing,
    )
    reports = run_experiment(cfg)
    _write(emit(reports, cfg.format), cfg.out)
    failed = [r for r in reports if r.error]
    for r in failed:
        print(f"trial {r.trial}: {r.error}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_adversary(args) -> int:
    if args.replays < 1 or args.trials < 1:
        raise ConfigError("replays and trials must be positive")
    reports = []
    if args.game == "gap":
        for n in args.n:
            for which in ("R0", "R1"):
                inst = exponential_instance(n, which)
                for bit in (0, 1):
                    rep = trusting_run(inst, bit)
                    reports.append(replace(rep, trial=len(reports), ms=rep.ms if args.timing else 0.0))
    else:
        for n in args.n:
            AdaptiveAdversary(n)  # validates n
            for trial in range(args.trials):
                seed = derive_seed(args.seed, n, trial)
                factory = _game_algorithm(args, n)
                alg = factory(seed) if args.replays == 1 else ReplayAverage(factory, args.replays, seed)
                t0 = time.perf_counter()
                res = play(alg, n)
                ms = 1000 * (time.perf_counter() - t0) if args.timing else 0.0
                reports.append(game_report(res, args.algo, args.seed, trial, ms))
    _write(emit(reports, args.format), args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    if args.dist == "gaussian":
        dist = GaussianMixture(np.zeros((1, args.dim)), np.ones((1, args.dim)), np.ones(1))
    else:
        dist = UniformBox(np.zeros(args.dim), np.ones(args.dim))
    table = convergence_benchmark(dist, args.sizes, args.trials, args.seed)
    _write(table.to_csv(), args.out)
    print(f"fitted log-log slope: {table.slope:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst, advice = load_instance(args.instance)
    kind = type(advice).__name__ if advice is not None else "none"
    reqs = 0 if inst.requests is None else inst.requests.shape[0]
    print(f"ok: metric={inst.space.kind} servers={inst.n} requests={reqs} advice={kind}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "adversary": cmd_adversary, "converge": cmd_converge, "validate": cmd_validate}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except VALIDATION_ERRORS as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:  # noqa: BLE001
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
