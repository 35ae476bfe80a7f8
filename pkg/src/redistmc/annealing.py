"""Simulated-annealing schedule: hot steps, population-tolerance annealing,
compactness-weight annealing, cold steps."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .chain import ChainState, DEFAULT_STALL_CAP, Trace
from .errors import StallDetected, StepOutOfRange
from .metrics import within_pop_tolerance

HOT, ANNEAL_POP, ANNEAL_COMP, COLD = "hot", "anneal_pop", "anneal_comp", "cold"


def _n_deltas(start, target, delta):
    # round first: 0.4 / 0.01 is 40.000000000000004 in binary floating point
    return math.ceil(round(abs(start - target) / delta, 9))


@dataclass(frozen=True)
class SchedulePoint:
    pop_tolerance: float
    beta_comp: float
    phase: str


@dataclass(frozen=True)
class AnnealSchedule:
    hot_steps: int = 500
    steps_per_delta: int = 10
    cold_steps: int = 100
    pop_tol_start: float = 1.0
    pop_tol_target: float = 0.1
    pop_tol_delta: float = 0.005
    comp_weight_start: float = 0.0
    comp_weight_target: float = 0.4
    comp_weight_delta: float = 0.01

    def __post_init__(self):
        if self.pop_tol_start < self.pop_tol_target:
            raise ValueError("pop_tol_start must be >= pop_tol_target")
        if self.comp_weight_start > self.comp_weight_target:
            raise ValueError("comp_weight_start must be <= comp_weight_target")
        if self.pop_tol_delta <= 0 or self.comp_weight_delta <= 0:
            raise ValueError("deltas must be positive")
        if min(self.hot_steps, self.cold_steps) < 0 or self.steps_per_delta < 1:
            raise ValueError("step counts must be nonnegative, steps_per_delta >= 1")

    @property
    def pop_phase_steps(self):
        return _n_deltas(self.pop_tol_start, self.pop_tol_target,
                         self.pop_tol_delta) * self.steps_per_delta

    @property
    def comp_phase_steps(self):
        return _n_deltas(self.comp_weight_start, self.comp_weight_target,
                         self.comp_weight_delta) * self.steps_per_delta

    def to_dict(self):
        return asdict(self)


def total_steps(schedule):
    return (schedule.hot_steps + schedule.pop_phase_steps
            + schedule.comp_phase_steps + schedule.cold_steps)


def params_at(schedule, step):
    """Parameters in force at proposal index ``step`` (a staircase)."""
    if not 0 <= step < total_steps(schedule):
        raise StepOutOfRange(f"step {step} outside 0..{total_steps(schedule) - 1}")
    s = schedule
    if step < s.hot_steps:
        return SchedulePoint(s.pop_tol_start, s.comp_weight_start, HOT)
    step -= s.hot_steps
    if step < s.pop_phase_steps:
        k = step // s.steps_per_delta
        tol = max(s.pop_tol_target, s.pop_tol_start - k * s.pop_tol_delta)
        return SchedulePoint(tol, s.comp_weight_start, ANNEAL_POP)
    step -= s.pop_phase_steps
    if step < s.comp_phase_steps:
        k = step // s.steps_per_delta
        w = min(s.comp_weight_target, s.comp_weight_start + k * s.comp_weight_delta)
        return SchedulePoint(s.pop_tol_target, w, ANNEAL_COMP)
    return SchedulePoint(s.pop_tol_target, s.comp_weight_target, COLD)


def schedule_arrays(schedule):
    """Per-step tolerance and compactness-weight arrays plus phase labels."""
    n = total_steps(schedule)
    tol = np.empty(n)
    comp = np.empty(n)
    phase = np.empty(n, dtype=object)
    for i in range(n):
        p = params_at(schedule, i)
        tol[i], comp[i], phase[i] = p.pop_tolerance, p.beta_comp, p.phase
    return tol, comp, phase


def phase_bounds(schedule):
    """Half-open [start, end) proposal ranges for each phase."""
    s = schedule
    a = s.hot_steps
    b = a + s.pop_phase_steps
    c = b + s.comp_phase_steps
    return {HOT: (0, a), ANNEAL_POP: (a, b), ANNEAL_COMP: (b, c), COLD: (c, c + s.cold_steps)}


def run_annealed_sample(graph, initial_plan, params, schedule, rng, *, kind="flip",
                        swap_rate=0.0, max_extra_cold=None, stall_cap=DEFAULT_STALL_CAP):
    """Run one annealed chain and return its final plan and trace.

    Every proposal advances the schedule, accepted or not. If the plan is
    still outside the target tolerance when the schedule ends, cold steps
    continue (up to ``max_extra_cold``, default ``100 * cold_steps``) until
    it is inside; failing that raises StallDetected.
    """
    tol, comp, _ = schedule_arrays(schedule)
    state = ChainState(initial_plan)
    trace = state.run(kind, rng, n_proposals=len(tol), pop_tolerance=tol, beta_comp=comp,
                      beta_pop=params.beta_pop, flip_prob=params.flip_prob,
                      swap_rate=swap_rate, stall_cap=stall_cap)
    plan = state.to_plan()
    if max_extra_cold is None:
        max_extra_cold = 100 * max(schedule.cold_steps, 1)
    extra = 0
    pieces = [trace]
    while not within_pop_tolerance(graph, plan, schedule.pop_tol_target):
        if extra >= max_extra_cold:
            raise StallDetected("annealed chain never re-entered the target tolerance")
        n = max(schedule.cold_steps, 1)
        pieces.append(state.run(kind, rng, n_proposals=n, step0=len(tol) + extra,
                                pop_tolerance=schedule.pop_tol_target,
                                beta_comp=schedule.comp_weight_target,
                                beta_pop=params.beta_pop, flip_prob=params.flip_prob,
                                swap_rate=swap_rate, stall_cap=stall_cap))
        extra += n
        plan = state.to_plan()
    return plan, Trace.concat(pieces)
