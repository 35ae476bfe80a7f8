"""Plan scores, the Metropolis acceptance probability and the hard
population-tolerance predicate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraph, DegenerateWeight


@dataclass(frozen=True)
class ChainParams:
    n_districts: int
    beta_pop: float = 0.0
    beta_comp: float = 0.0
    pop_tolerance: float = 1.0
    flip_prob: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.pop_tolerance <= 1.0:
            raise ValueError("pop_tolerance must lie in [0, 1]")
        if not 0.0 <= self.flip_prob < 1.0:
            raise ValueError("flip_prob must lie in [0, 1)")
        if self.beta_pop < 0 or self.beta_comp < 0:
            raise ValueError("betas must be nonnegative")
        if self.n_districts < 1:
            raise ValueError("need at least one district")


def ideal_population(graph, n_districts):
    return graph.total_pop / n_districts


def pop_equality(graph, plan):
    ideal = ideal_population(graph, plan.n_districts)
    return float(np.abs(plan.district_pops - ideal).sum())


def compactness(graph, plan):
    """Fraction of dual-graph edges that are cut."""
    if graph.n_edges == 0:
        raise DegenerateGraph("compactness undefined on a graph without edges")
    return plan.cut_edge_count / graph.n_edges


def energy(graph, plan, beta_pop, beta_comp):
    e = 0.0
    if beta_pop:
        e += beta_pop * pop_equality(graph, plan)
    if beta_comp:
        e += beta_comp * compactness(graph, plan)
    return e


def weight(graph, plan, params):
    return math.exp(-energy(graph, plan, params.beta_pop, params.beta_comp))


def acceptance_probability(w_new, w_old):
    if w_old <= 0:
        raise DegenerateWeight("current plan has zero weight")
    return min(w_new / w_old, 1.0)


def within_pop_tolerance(graph, plan, tol):
    """True when every district is within ``tol * ideal`` of the ideal.

    A tolerance of 1.0 or more places no constraint at all, so hot annealing
    steps are unconstrained even when a district grows past twice the ideal.
    """
    if tol >= 1.0:
        return True
    ideal = ideal_population(graph, plan.n_districts)
    return bool(np.all(np.abs(plan.district_pops - ideal) <= tol * ideal))


def tolerance_excess(district_pops, ideal, tol):
    """Total population by which districts overshoot the tolerance band.

    Zero exactly when the plan is within tolerance. The chains use it to let
    a plan that an annealing step has left outside a freshly tightened band
    move back toward it. Always zero for ``tol >= 1``.
    """
    if tol >= 1.0:
        return 0.0
    bound = tol * ideal
    dev = np.abs(np.asarray(district_pops, dtype=np.float64) - ideal)
    return float(np.where(dev <= bound, 0.0, dev - bound).sum())
