"""Convergence diagnostics: Gelman-Rubin R-hat, acceptance summaries and the
minimum-steps search."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import REASON_CODES, ChainState
from .errors import InsufficientData, NotConverged, ZeroWithinVariance


@dataclass
class ChainTrace:
    values: np.ndarray
    accepted: np.ndarray = field(default=None)
    statistic: str = "cut_edge_count"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.accepted is None:
            self.accepted = np.ones(len(self.values), dtype=bool)
        self.accepted = np.asarray(self.accepted, dtype=bool)
        if len(self.accepted) != len(self.values):
            raise ValueError("acceptance flags must match the series length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace values must be finite")

    @classmethod
    def from_trace(cls, trace):
        return cls(trace.cut_counts, trace.accepted)


def gelman_rubin(traces, discard_fraction=0.5):
    """Potential scale reduction factor over ``m`` chains.

    The first ``discard_fraction`` of every chain is dropped, then chains
    are truncated to a common length ``n``. With B = n * var(chain means)
    and W = mean(within-chain variances), both with ddof=1,
    R-hat = sqrt(((n - 1)/n * W + B/n) / W).
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError("discard_fraction must lie in [0, 1)")
    series = [np.asarray(getattr(t, "values", t), dtype=np.float64) for t in traces]
    if len(series) < 2:
        raise InsufficientData("need at least two chains")
    kept = [s[int(len(s) * discard_fraction):] for s in series]
    n = min(len(s) for s in kept)
    if n < 2:
        raise InsufficientData("each chain needs at least two retained values")
    x = np.stack([s[:n] for s in kept])
    means = x.mean(axis=1)
    w = x.var(axis=1, ddof=1).mean()
    if w == 0:
        raise ZeroWithinVariance("all chains are constant")
    b = n * means.var(ddof=1)
    v_hat = (n - 1) / n * w + b / n
    return float(np.sqrt(v_hat / w))


def acceptance_summary(trace):
    """Counts by outcome and the acceptance rate (0 for an empty trace)."""
    reasons = np.asarray(getattr(trace, "reasons", []), dtype=np.int64)
    if not hasattr(trace, "reasons"):
        acc = np.asarray(trace.accepted, dtype=bool)
        reasons = np.where(acc, 0, 3)
    counts = np.bincount(reasons, minlength=len(REASON_CODES))
    proposals = int(len(reasons))
    accepted = int(counts[0])
    return {
        "proposals": proposals,
        "accepted": accepted,
        "rate": accepted / proposals if proposals else 0.0,
        "rejections": {r.value: int(counts[i]) for i, r in enumerate(REASON_CODES) if i},
    }


def run_parallel_chains(graph, initial_plans, params, n_accepted, seeds, *, kind="flip",
                        swap_rate=0.0, executor=None):
    """Run one chain per seed; returns the list of Trace objects in seed order."""
    jobs = [(graph, plan, params, n_accepted, seed, kind, swap_rate)
            for plan, seed in zip(initial_plans, seeds)]
    if executor is None:
        return [_chain_job(*job) for job in jobs]
    return list(executor.map(_chain_job, *zip(*jobs)))


def _chain_job(graph, plan, params, n_accepted, seed, kind, swap_rate):
    state = ChainState(plan)
    return state.run(kind, np.random.default_rng(seed), target_accepted=n_accepted,
                     pop_tolerance=params.pop_tolerance, beta_comp=params.beta_comp,
                     beta_pop=params.beta_pop, flip_prob=params.flip_prob,
                     swap_rate=swap_rate)


def min_steps_search(graph, initial_plan, params, n_chains, threshold, step_grid, rng, *,
                     kind="flip", discard_fraction=0.5, swap_rate=0.0, executor=None,
                     return_profile=False):
    """Smallest accepted-step count in ``step_grid`` whose R-hat is below ``threshold``.

    ``initial_plan`` may be one plan shared by every chain or a list with one
    plan per chain. Each grid point runs ``n_chains`` fresh chains; the
    monitored scalar is the cut-edge count after every proposal.
    """
    if n_chains < 2:
        raise InsufficientData("need at least two chains")
    grid = list(step_grid)
    if grid != sorted(grid):
        raise ValueError("step_grid must be ascending")
    plans = (list(initial_plan) if isinstance(initial_plan, (list, tuple))
             else [initial_plan] * n_chains)
    profile = {}
    for steps in grid:
        seeds = rng.integers(0, 2**63, size=n_chains)
        traces = run_parallel_chains(graph, plans, params, steps, seeds, kind=kind,
                                     swap_rate=swap_rate, executor=executor)
        try:
            r = gelman_rubin([ChainTrace.from_trace(t) for t in traces], discard_fraction)
        except ZeroWithinVariance:
            r = float("inf")
        profile[int(steps)] = r
        if r < threshold:
            return (int(steps), profile) if return_profile else int(steps)
    raise NotConverged(f"R-hat never fell below {threshold}", profile)
