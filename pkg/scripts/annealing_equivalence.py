"""Plain chains run to an R-hat-certified length versus annealed chains.

On a 6x6 grid with random per-unit vote shares, finds the smallest
accepted-step count with R-hat < 1.1, draws plans from both procedures and
runs a chi-squared test on the seats-won tables.

    python scripts/annealing_equivalence.py --plans 300
"""
import argparse
import time

import numpy as np
from scipy.stats import chi2_contingency

from redistmc.analysis import seats_won
from redistmc.annealing import AnnealSchedule, run_annealed_sample
from redistmc.chain import ChainState
from redistmc.diagnostics import min_steps_search
from redistmc.graph import grid_graph
from redistmc.metrics import ChainParams
from redistmc.seeding import seed_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plans", type=int, default=300)
    ap.add_argument("--size", type=int, default=6)
    ap.add_argument("--districts", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    k = args.size
    dem = [int(np.random.default_rng(v + 11).integers(25, 76)) for v in range(k * k)]
    g = grid_graph(k, k, dem=dem, rep=[100 - d for d in dem])
    params = ChainParams(args.districts, pop_tolerance=0.1, beta_comp=0.4)
    init = seed_plan(g, args.districts, 0.1, np.random.default_rng(0))

    steps, profile = min_steps_search(g, init, params, 10, 1.1,
                                      [50, 100, 200, 500, 1000, 2000, 5000],
                                      np.random.default_rng(1), return_profile=True)
    print("R-hat profile:", {s: round(r, 3) for s, r in profile.items()}, "->", steps)

    children = np.random.SeedSequence(args.seed).spawn(2 * args.plans)
    t0 = time.perf_counter()
    plain = []
    for c in children[:args.plans]:
        state = ChainState(init)
        state.run("flip", np.random.default_rng(c), target_accepted=steps,
                  pop_tolerance=0.1, beta_comp=0.4)
        plain.append(seats_won(g, state.to_plan()))
    t1 = time.perf_counter()
    annealed = [seats_won(g, run_annealed_sample(g, init, params, AnnealSchedule(),
                                                 np.random.default_rng(c))[0])
                for c in children[args.plans:]]
    t2 = time.perf_counter()

    ks = sorted(set(plain) | set(annealed))
    table = np.array([[plain.count(s) for s in ks], [annealed.count(s) for s in ks]])
    print("seats   ", ks)
    print(f"plain    {table[0].tolist()}  ({t1 - t0:.1f}s)")
    print(f"annealed {table[1].tolist()}  ({t2 - t1:.1f}s)")
    if len(ks) > 1:
        print(f"chi-squared p = {chi2_contingency(table)[1]:.4f}")


if __name__ == "__main__":
    main()
