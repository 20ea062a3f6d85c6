"""Time the league-phase and group-stage draws on the bundled 2024/25 season.

    python scripts/draw_timing.py --draws 500
"""

import argparse
import time

import numpy as np

from tourneysim.draw import draw_groups, draw_league
from tourneysim.model import Design, SeedingPolicy, assign_pots, bundled_season, design_teams
from tourneysim.montecarlo import derive_stream


def timed(fn, n):
    times = np.empty(n)
    for d in range(n):
        start = time.perf_counter()
        fn(d)
        times[d] = time.perf_counter() - start
    return times


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    roster = bundled_season("2024-25")
    for design, draw in ((Design.NEW, draw_league), (Design.OLD, draw_groups)):
        for policy in SeedingPolicy:
            pots = assign_pots(design_teams(roster, design), design, policy)
            tag = f"timing-{design.value}-{policy.value}"
            t = timed(lambda d: draw(pots, derive_stream(args.seed, tag, d, -1)), args.draws)
            print(f"{design.value:4s} {policy.value:5s} mean {1e3 * t.mean():7.2f} ms  "
                  f"median {1e3 * np.median(t):7.2f} ms  max {1e3 * t.max():7.2f} ms")


if __name__ == "__main__":
    main()
