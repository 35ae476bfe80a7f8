"""Write a synthetic unit-graph file for trying the command line.

A rows x cols lattice with lumpy populations and a smooth partisan gradient
plus noise, so seat counts vary across plans.

    python scripts/make_demo_state.py --rows 12 --cols 16 --out demo/units.json
"""
import argparse
from pathlib import Path

import numpy as np

from redistmc.graph import grid_graph
from redistmc.io import save_unit_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=12)
    ap.add_argument("--cols", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="demo/units.json")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.rows * args.cols
    pops = rng.integers(800, 1200, n)
    col = np.tile(np.arange(args.cols), args.rows)
    share = np.clip(0.35 + 0.3 * col / max(args.cols - 1, 1) + rng.normal(0, 0.08, n), 0.05, 0.95)
    turnout = (pops * rng.uniform(0.4, 0.6, n)).astype(int)
    dem = (turnout * share).astype(int)
    g = grid_graph(args.rows, args.cols, pops=pops, dem=dem, rep=turnout - dem)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_unit_graph(g, args.out)
    print(f"wrote {args.out}: {n} units, population {g.total_pop}")


if __name__ == "__main__":
    main()
