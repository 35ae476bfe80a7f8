"""Chain state, step telemetry and the compiled chain drivers."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoBoundary, StallDetected
from .graph import Districting
from .metrics import ideal_population

DEFAULT_STALL_CAP = 1_000_000


class RejectReason(str, enum.Enum):
    NONE = "none"
    INVALID_CONTIGUITY = "invalid_contiguity"
    TOLERANCE = "tolerance"
    METROPOLIS = "metropolis"


REASON_CODES = (RejectReason.NONE, RejectReason.INVALID_CONTIGUITY,
                RejectReason.TOLERANCE, RejectReason.METROPOLIS)


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    proposed: bool
    accepted: bool
    rejected_reason: RejectReason
    weight_after: float


class Trace:
    """Per-proposal outcomes stored column-wise.

    Indexing yields :class:`StepRecord` objects; the arrays are what the
    diagnostics consume.
    """

    def __init__(self, reasons=None, weights=None, cut_counts=None, step0=0, codes=None):
        self.codes = None if codes is None else np.asarray(codes, dtype=np.int64)
        self.reasons = np.asarray(reasons if reasons is not None else [], dtype=np.int8)
        self.weights = np.asarray(weights if weights is not None else [], dtype=np.float64)
        self.cut_counts = np.asarray(cut_counts if cut_counts is not None else [],
                                     dtype=np.int64)
        self.step0 = step0

    def __len__(self):
        return len(self.reasons)

    def __getitem__(self, i):
        code = int(self.reasons[i])
        return StepRecord(step_index=self.step0 + (i % len(self)), proposed=True,
                          accepted=code == 0, rejected_reason=REASON_CODES[code],
                          weight_after=float(self.weights[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def accepted(self):
        return self.reasons == 0

    @property
    def n_accepted(self):
        return int(np.count_nonzero(self.reasons == 0))

    @classmethod
    def from_records(cls, records, cut_counts=None):
        codes = [REASON_CODES.index(r.rejected_reason) for r in records]
        step0 = records[0].step_index if records else 0
        return cls(codes, [r.weight_after for r in records],
                   cut_counts if cut_counts is not None else np.zeros(len(codes)), step0)

    @classmethod
    def concat(cls, traces):
        traces = [t for t in traces if len(t)]
        if not traces:
            return cls()
        codes = None
        if all(t.codes is not None for t in traces):
            codes = np.concatenate([t.codes for t in traces])
        return cls(np.concatenate([t.reasons for t in traces]),
                   np.concatenate([t.weights for t in traces]),
                   np.concatenate([t.cut_counts for t in traces]), traces[0].step0, codes)


def _as_schedule(x):
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


class ChainState:
    """Flat mutable state that the compiled kernels update in place."""

    def __init__(self, plan):
        g = plan.graph
        self.graph = g
        self.n_districts = plan.n_districts
        n = g.n_vertices
        self.assign = plan.assignment.astype(np.int64).copy()
        self.dpops = plan.district_pops.astype(np.int64).copy()
        self.dsize = plan.district_sizes.astype(np.int64).copy()
        a = self.assign
        src = np.repeat(np.arange(n), np.diff(g.indptr))
        self.cut_deg = np.bincount(src[a[src] != a[g.indices]], minlength=n).astype(np.int64)
        self.bnd_pos = np.full(n, -1, dtype=np.int64)
        self.bnd_list = np.zeros(n, dtype=np.int64)
        bnd = np.flatnonzero(self.cut_deg > 0)
        self.bnd_list[:len(bnd)] = bnd
        self.bnd_pos[bnd] = np.arange(len(bnd))
        # base-n state codes when n**V fits in an int64
        self.encodes = n * np.log2(max(plan.n_districts, 2)) < 62
        self.powers = np.zeros(n, dtype=np.int64)
        if self.encodes:
            self.powers[:] = [plan.n_districts ** v for v in range(n)]
        self.scal = np.array([len(bnd), plan.cut_edge_count, 0, 0, 0,
                              int(self.powers @ self.assign)], dtype=np.int64)
        self.ideal = ideal_population(g, plan.n_districts)
        self._mark = np.zeros(n, dtype=np.int64)
        self._queue = np.zeros(n, dtype=np.int64)
        self._flip_scratch = None

    @property
    def state_code(self):
        return int(self.scal[5]) if self.encodes else None

    @property
    def boundary_size(self):
        return int(self.scal[0])

    @property
    def cut_edge_count(self):
        return int(self.scal[1])

    def to_plan(self):
        return Districting(self.graph, self.assign.copy(), self.n_districts,
                           self.dpops.copy(), self.dsize.copy(), int(self.scal[1]))

    def _scratch(self):
        if self._flip_scratch is None:
            n = self.graph.n_vertices
            k = self.n_districts
            self._flip_scratch = (
                np.zeros(n, dtype=np.int64),      # comp_mark
                np.zeros(n, dtype=np.int64),      # comp_of
                np.zeros(n, dtype=np.int64),      # comp_verts
                np.zeros(n + 1, dtype=np.int64),  # comp_start
                np.zeros(n, dtype=np.int64),      # chosen
                np.zeros(n, dtype=np.int64),      # comp_src
                np.zeros(n, dtype=np.int64),      # comp_target
                np.zeros(n, dtype=np.int64),      # chosen_list
                np.zeros(n, dtype=np.int64),      # flipped
                np.zeros(k, dtype=np.int64),      # dmark
                np.zeros(k, dtype=np.int64),      # dbuf
                np.zeros(n, dtype=np.int64),      # order
            )
        return self._flip_scratch

    def run(self, kind, rng, *, n_proposals=None, target_accepted=None,
            pop_tolerance=1.0, beta_comp=0.0, beta_pop=0.0, step0=0,
            flip_prob=0.05, swap_rate=0.0, coin_selection=False, hastings=True,
            stall_cap=DEFAULT_STALL_CAP):
        """Advance the chain.

        Stops after ``n_proposals`` proposals, or once ``target_accepted``
        proposals have been accepted, whichever is given (both: whichever
        comes first). The tolerance and beta arguments are scalars or
        per-step arrays indexed by ``step0 + i``; indices past the end reuse
        the last entry.
        """
        if n_proposals is None and target_accepted is None:
            raise ValueError("give n_proposals or target_accepted")
        if kind not in ("flip", "single-vertex"):
            raise ValueError(f"unknown chain kind {kind!r}")
        if kind == "single-vertex" and self.scal[0] == 0:
            raise NoBoundary("plan has no cut edges")
        tol = _as_schedule(pop_tolerance)
        bcomp = _as_schedule(beta_comp)
        bpop = _as_schedule(beta_pop)
        g = self.graph
        n_edges = max(g.n_edges, 1)
        target = -1 if target_accepted is None else int(target_accepted)
        limit = np.inf if n_proposals is None else int(n_proposals)
        pieces = []
        done = 0
        accepted = 0
        while done < limit and (target < 0 or accepted < target):
            if n_proposals is not None:
                chunk = int(min(limit - done, 1 << 20))
            else:
                chunk = int(min(max(4 * (target - accepted), 1024), 1 << 20))
            reasons = np.empty(chunk, dtype=np.int8)
            weights = np.empty(chunk, dtype=np.float64)
            cuts = np.empty(chunk, dtype=np.int64)
            codes = np.empty(chunk, dtype=np.int64)
            seed = int(rng.integers(0, 2**32))
            left = -1 if target < 0 else target - accepted
            if kind == "single-vertex":
                count, n_acc, stalled = _kernels.single_vertex_run(
                    g.indptr, g.indices, g.pops, self.assign, self.dpops, self.dsize,
                    self.cut_deg, self.bnd_list, self.bnd_pos, self.scal,
                    float(n_edges), self.ideal, tol, bcomp, bpop, step0 + done,
                    chunk, left, stall_cap, hastings, seed,
                    reasons, weights, cuts, codes, self.powers, self._mark, self._queue)
            else:
                count, n_acc, stalled = _kernels.flip_run(
                    g.indptr, g.indices, g.pops, self.assign, self.dpops, self.dsize,
                    self.cut_deg, self.bnd_list, self.bnd_pos, self.scal,
                    float(n_edges), self.ideal, tol, bcomp, bpop, step0 + done,
                    chunk, left, stall_cap, float(flip_prob), float(swap_rate),
                    bool(coin_selection), seed,
                    reasons, weights, cuts, codes, self.powers, self._mark, self._queue,
                    *self._scratch())
            pieces.append(Trace(reasons[:count], weights[:count], cuts[:count],
                                step0 + done, codes[:count] if self.encodes else None))
            done += count
            accepted += n_acc
            if stalled:
                raise StallDetected(
                    f"{stall_cap} consecutive rejections after {accepted} accepted steps")
        trace = Trace.concat(pieces)
        trace.step0 = step0
        return trace


def run_chain(graph, initial_plan, params, n_accepted_target, rng, *, kind="flip",
              hastings=True, stall_cap=DEFAULT_STALL_CAP):
    """Run until ``n_accepted_target`` proposals have been accepted.

    Returns the final plan and the trace of every proposal.
    """
    if initial_plan.graph is not graph:
        initial_plan = Districting.from_assignment(graph, initial_plan.assignment,
                                                   initial_plan.n_districts)
    if n_accepted_target == 0:
        return initial_plan.copy(), Trace()
    state = ChainState(initial_plan)
    trace = state.run(kind, rng, target_accepted=n_accepted_target,
                      pop_tolerance=params.pop_tolerance, beta_comp=params.beta_comp,
                      beta_pop=params.beta_pop, flip_prob=params.flip_prob,
                      hastings=hastings, stall_cap=stall_cap)
    return state.to_plan(), trace
