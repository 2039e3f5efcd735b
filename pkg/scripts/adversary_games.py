"""Lower-bound games: the harmonic adversary and the exponential-gap instance.

Prints two tables. The first compares the cost each algorithm is forced
to pay on the discrete metric with the harmonic bound; the second lists
OPT and the cost of following each advice bit on the doubling line.
"""
from __future__ import annotations

import argparse

import numpy as np

from advicematch.adversaries import exponential_instance, harmonic_bound, play, trusting_run
from advicematch.baselines import GreedyFractional
from advicematch.distributions import uniform_over
from advicematch.fractional import AdviceFractional, BlowupConfig, default_copies
from advicematch.metric import Discrete


def harmonic_table(sizes) -> None:
    print(f"{'N':>5} {'bound':>9} {'greedy_frac':>12} {'adv[servers]':>13} {'adv[point]':>11}")
    for n in sizes:
        servers, sp = np.arange(n), Discrete()
        cfg = BlowupConfig(default_copies(n))
        costs = [play(GreedyFractional(servers, sp), n).cost]
        for pts in (servers, servers[:1]):
            costs.append(play(AdviceFractional(servers, uniform_over(pts), sp, cfg), n).cost)
        print(f"{n:>5} {harmonic_bound(n):>9.4f} {costs[0]:>12.4f} {costs[1]:>13.4f} {costs[2]:>11.4f}")


def gap_table(sizes) -> None:
    print(f"\n{'N':>3} {'actual':>6} {'advice':>6} {'OPT':>10} {'cost':>10} {'ratio':>10}")
    for n in sizes:
        for which in ("R0", "R1"):
            inst = exponential_instance(n, which)
            for bit in (0, 1):
                rep = trusting_run(inst, bit)
                print(f"{n:>3} {which:>6} {'R' + str(bit):>6} {rep.opt_cost:>10.2f} "
                      f"{rep.actual_cost:>10.2f} {rep.ratio:>10.4f}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--harmonic-n", type=int, nargs="+", default=[4, 16, 64, 256])
    ap.add_argument("--gap-n", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    args = ap.parse_args(argv)
    harmonic_table(args.harmonic_n)
    gap_table(args.gap_n)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
