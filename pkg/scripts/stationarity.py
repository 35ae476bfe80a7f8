"""Compare chain visit frequencies on the 3x3 grid with the exact target law.

Every contiguous 3-district plan is enumerated by brute force; the chain is
run with and without the Hastings correction and the total-variation
distance to the weight-proportional distribution is printed.

    python scripts/stationarity.py --steps 1000000 --beta-pop 1 --beta-comp 1
"""
import argparse
import itertools
import math
import time

import networkx as nx
import numpy as np

from redistmc.chain import ChainState
from redistmc.graph import Districting, grid_graph


def enumerate_states(G, n):
    out = []
    for lab in itertools.product(range(n), repeat=G.number_of_nodes()):
        lab = np.array(lab)
        if all(np.any(lab == d) and nx.is_connected(G.subgraph(np.flatnonzero(lab == d).tolist()))
               for d in range(n)):
            out.append(lab)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=10**6)
    ap.add_argument("--beta-pop", type=float, default=1.0)
    ap.add_argument("--beta-comp", type=float, default=1.0)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    G = nx.convert_node_labels_to_integers(nx.grid_2d_graph(3, 3), ordering="sorted")
    states = enumerate_states(G, 3)
    codes = np.array([sum(int(d) * 3 ** v for v, d in enumerate(s)) for s in states])
    order = np.argsort(codes)
    w = np.array([math.exp(-(args.beta_pop * np.abs(np.bincount(s, minlength=3) - 3).sum()
                             + args.beta_comp * sum(s[u] != s[v] for u, v in G.edges()) / 12))
                  for s in states])
    target = (w / w.sum())[order]
    print(f"{len(states)} valid plans")

    g = grid_graph(3, 3)
    start = Districting.from_assignment(g, np.array([0, 0, 0, 1, 1, 1, 2, 2, 2]))
    for kind, hastings in (("single-vertex", True), ("single-vertex", False), ("flip", True)):
        for seed in range(args.seeds):
            state = ChainState(start)
            t0 = time.perf_counter()
            trace = state.run(kind, np.random.default_rng(seed), n_proposals=args.steps,
                              beta_pop=args.beta_pop, beta_comp=args.beta_comp,
                              hastings=hastings)
            secs = time.perf_counter() - t0
            pos = np.searchsorted(codes[order], trace.codes)
            emp = np.bincount(pos, minlength=len(codes)) / len(pos)
            tv = 0.5 * np.abs(emp - target).sum()
            label = kind + ("" if kind == "flip" else f" hastings={hastings}")
            print(f"{label:28s} seed={seed} TV={tv:.4f} "
                  f"accept={trace.n_accepted / len(trace):.3f} {secs:.1f}s")


if __name__ == "__main__":
    main()
