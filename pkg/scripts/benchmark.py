"""Proposal throughput of both chains on a rows x cols grid."""
import argparse
import time

import numpy as np

from redistmc.chain import ChainState
from redistmc.graph import grid_graph
from redistmc.seeding import seed_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=25)
    ap.add_argument("--cols", type=int, default=40)
    ap.add_argument("--districts", type=int, default=4)
    ap.add_argument("--tol", type=float, default=0.1)
    ap.add_argument("--beta-comp", type=float, default=0.4)
    ap.add_argument("--swap-rate", type=float, default=0.0)
    args = ap.parse_args()

    g = grid_graph(args.rows, args.cols)
    plan = seed_plan(g, args.districts, args.tol, np.random.default_rng(0))
    rng = np.random.default_rng(1)
    for kind, n in (("single-vertex", 2 * 10**6), ("flip", 2 * 10**5)):
        state = ChainState(plan)
        kw = dict(pop_tolerance=args.tol, beta_comp=args.beta_comp, swap_rate=args.swap_rate)
        state.run(kind, rng, n_proposals=1000, **kw)  # compile
        t0 = time.perf_counter()
        trace = state.run(kind, rng, n_proposals=n, **kw)
        secs = time.perf_counter() - t0
        counts = np.bincount(trace.reasons, minlength=4)
        print(f"{kind:14s} {n / secs:12,.0f} proposals/s  accepted={counts[0] / n:.3f} "
              f"contiguity={counts[1] / n:.3f} tolerance={counts[2] / n:.3f} "
              f"metropolis={counts[3] / n:.3f}")


if __name__ == "__main__":
    main()
