"""Initial plans by balanced region growing."""
from __future__ import annotations

import numpy as np

from .chain import ChainState
from .errors import SeedFailure
from .graph import Districting, is_valid
from .metrics import within_pop_tolerance


def _grow(graph, n, rng):
    nv = graph.n_vertices
    assign = np.full(nv, -1, dtype=np.int64)
    seeds = rng.choice(nv, size=n, replace=False)
    pops = np.zeros(n, dtype=np.int64)
    # frontier[d][v] = number of v's neighbours already in region d
    frontier = [dict() for _ in range(n)]

    def attach(v, d):
        assign[v] = d
        pops[d] += graph.pops[v]
        for f in frontier:
            f.pop(v, None)
        for u in graph.neighbors(v):
            u = int(u)
            if assign[u] < 0:
                frontier[d][u] = frontier[d].get(u, 0) + 1

    for d, s in enumerate(seeds):
        attach(int(s), d)
    for _ in range(nv - n):
        live = [d for d in range(n) if frontier[d]]
        if not live:
            return None
        d = min(live, key=lambda k: (pops[k], k))
        best = max(frontier[d].values())
        cands = sorted(v for v, c in frontier[d].items() if c == best)
        attach(cands[int(rng.integers(0, len(cands)))], d)
    return Districting.from_assignment(graph, assign, n)


def seed_plan(graph, n, tol, rng, *, attempts=20, repair_steps=200_000):
    """A valid plan with every district within ``tol`` of the ideal population.

    Regions grow from ``n`` random seed vertices, the lightest region taking
    the frontier vertex with the most neighbours already inside it. If the
    result is outside tolerance a population- and cut-weighted single-vertex
    chain pushes it inside; its moves never increase the total overshoot.
    """
    if n < 1:
        raise SeedFailure("need at least one district")
    if n > graph.n_vertices:
        raise SeedFailure(f"cannot split {graph.n_vertices} units into {n} districts")
    if n == 1:
        return Districting.from_assignment(graph, np.zeros(graph.n_vertices, np.int64), 1)
    unit = max(float(graph.pops[graph.pops > 0].mean()) if graph.pops.any() else 1.0, 1.0)
    for _ in range(attempts):
        plan = _grow(graph, n, rng)
        if plan is None or not is_valid(graph, plan):
            continue
        if within_pop_tolerance(graph, plan, tol):
            return plan
        state = ChainState(plan)
        for _ in range(0, repair_steps, 2000):
            state.run("single-vertex", rng, n_proposals=2000, pop_tolerance=tol,
                      beta_pop=3.0 / unit,
                      beta_comp=0.5 * graph.n_edges, hastings=False)
            plan = state.to_plan()
            if within_pop_tolerance(graph, plan, tol):
                return plan
    raise SeedFailure(f"no plan within tolerance {tol} after {attempts} attempts")
