"""Reference (pure Python) proposal kernels.

These mirror the compiled kernels in ``_kernels`` step for step but take any
``rng`` exposing ``random()`` and ``integers(low, high)``, so tests can force
individual branches. They are slow; chains use :mod:`redistmc.chain`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import RejectReason, StepRecord
from .errors import NoBoundary
from .graph import _relabel_inplace, is_valid
from .metrics import energy, ideal_population, tolerance_excess


@dataclass(frozen=True)
class FlipLabelling:
    flagged: frozenset


@dataclass(frozen=True)
class BoundaryComponent:
    vertices: frozenset
    district: int
    neighbor_districts: frozenset


def label_flip_edges(graph, plan, flip_prob, rng):
    """Flag each monochromatic edge independently with probability ``flip_prob``."""
    a = plan.assignment
    flagged = set()
    for u, v in graph.edges:
        if a[u] == a[v] and rng.random() < flip_prob:
            flagged.add((int(u), int(v)))
    return FlipLabelling(frozenset(flagged))


def boundary_components(graph, plan, labelling):
    a = plan.assignment
    n = graph.n_vertices
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in labelling.flagged:
        parent[find(u)] = find(v)
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    out = []
    for verts in groups.values():
        nbr = {int(a[y]) for x in verts for y in graph.neighbors(x) if a[y] != a[x]}
        if nbr:
            out.append(BoundaryComponent(frozenset(verts), int(a[verts[0]]), frozenset(nbr)))
    out.sort(key=lambda c: min(c.vertices))
    return out


def _touches(graph, comp, taken):
    return any(int(y) in taken for x in comp.vertices for y in graph.neighbors(x))


def select_flip_set(graph, components, rng, *, swap_rate=0.0, coin=False):
    """Pick pairwise non-adjacent components and a target district for each.

    Components are visited in a random order. With ``coin`` each one is
    kept on a fair coin; otherwise the first ``1 + Poisson(swap_rate)``
    admissible ones are kept. A component adjacent to one already kept is
    skipped. Targets are uniform over the sorted neighbouring districts.
    """
    k = len(components)
    if coin:
        want = k
    else:
        want = 1 + (int(rng.poisson(swap_rate)) if swap_rate > 0 else 0)
    order = list(range(k))
    taken = set()
    flips = []
    for i in range(k):
        if len(flips) >= want:
            break
        j = int(rng.integers(i, k))
        order[i], order[j] = order[j], order[i]
        comp = components[order[i]]
        if coin and rng.random() >= 0.5:
            continue
        if _touches(graph, comp, taken):
            continue
        targets = sorted(comp.neighbor_districts)
        flips.append((comp, targets[int(rng.integers(0, len(targets)))]))
        taken |= comp.vertices
    return flips


def apply_flip_set(plan, flips):
    out = plan.copy()
    for comp, target in flips:
        for v in sorted(comp.vertices):
            _relabel_inplace(out, v, target)
    return out


def _point(params, schedule_point):
    if schedule_point is None:
        return params.pop_tolerance, params.beta_comp, params.beta_pop
    return (schedule_point.pop_tolerance, schedule_point.beta_comp,
            getattr(schedule_point, "beta_pop", params.beta_pop))


def metropolis_accept(log_ratio, rng):
    """Accept with probability min(exp(log_ratio), 1); draws only when below 1."""
    return log_ratio >= 0.0 or rng.random() < math.exp(log_ratio)


def _filter(graph, plan, proposal, tol, beta_comp, beta_pop, rng, log_q=0.0, step_index=0):
    ideal = ideal_population(graph, plan.n_districts)
    e_old = energy(graph, plan, beta_pop, beta_comp)

    def record(reason, e):
        return StepRecord(step_index, True, reason is RejectReason.NONE, reason, math.exp(-e))

    if not is_valid(graph, proposal):
        return plan, record(RejectReason.INVALID_CONTIGUITY, e_old)
    if (tolerance_excess(proposal.district_pops, ideal, tol)
            > tolerance_excess(plan.district_pops, ideal, tol)):
        return plan, record(RejectReason.TOLERANCE, e_old)
    e_new = energy(graph, proposal, beta_pop, beta_comp)
    if not metropolis_accept(e_old - e_new + log_q, rng):
        return plan, record(RejectReason.METROPOLIS, e_old)
    return proposal, record(RejectReason.NONE, e_new)


def propose_and_filter(graph, plan, params, schedule_point, rng, *, swap_rate=0.0,
                       coin=False, step_index=0):
    """One flip-algorithm step: label, find boundary components, select, apply, filter."""
    tol, beta_comp, beta_pop = _point(params, schedule_point)
    labelling = label_flip_edges(graph, plan, params.flip_prob, rng)
    comps = boundary_components(graph, plan, labelling)
    flips = select_flip_set(graph, comps, rng, swap_rate=swap_rate, coin=coin)
    proposal = apply_flip_set(plan, flips)
    return _filter(graph, plan, proposal, tol, beta_comp, beta_pop, rng,
                   step_index=step_index)


def boundary_vertices(graph, plan):
    a = plan.assignment
    return [v for v in range(graph.n_vertices)
            if any(a[u] != a[v] for u in graph.neighbors(v))]


def single_vertex_chain_step(graph, plan, params, rng, schedule_point=None, *,
                             hastings=True, step_index=0):
    """Recolour one boundary vertex across one of its cut edges, then filter.

    With ``hastings`` the acceptance ratio carries the proposal asymmetry
    q(back)/q(forward), which makes the chain's stationary law proportional
    to the weight.
    """
    tol, beta_comp, beta_pop = _point(params, schedule_point)
    bnd = boundary_vertices(graph, plan)
    if not bnd:
        raise NoBoundary("plan has no cut edges")
    a = plan.assignment
    v = bnd[int(rng.integers(0, len(bnd)))]
    old = int(a[v])
    cut_nbrs = [int(u) for u in graph.neighbors(v) if a[u] != old]
    target = int(a[cut_nbrs[int(rng.integers(0, len(cut_nbrs)))]])
    proposal = plan.copy()
    _relabel_inplace(proposal, v, target)
    log_q = 0.0
    if hastings:
        nbrs = graph.neighbors(v)
        c_old = int(np.count_nonzero(a[nbrs] == old))
        c_new = int(np.count_nonzero(a[nbrs] == target))
        bnd_new = boundary_vertices(graph, proposal)
        back = c_old / (len(nbrs) - c_new) / len(bnd_new) if c_old else 0.0
        fwd = c_new / len(cut_nbrs) / len(bnd)
        log_q = math.log(back / fwd) if back > 0 else -math.inf
    return _filter(graph, plan, proposal, tol, beta_comp, beta_pop, rng, log_q, step_index)
