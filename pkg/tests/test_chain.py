import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from redistmc.chain import ChainState, RejectReason, Trace, run_chain
from redistmc.errors import NoBoundary, StallDetected
from redistmc.graph import Districting, count_cut_edges, grid_graph, is_valid
from redistmc.metrics import ChainParams, ideal_population, tolerance_excess
from redistmc.proposals import (FlipLabelling, apply_flip_set, boundary_components,
                                propose_and_filter)

from conftest import decode, empirical_tv, encode, enumerate_valid_plans, plan_of


def _check_state(state):
    g = state.graph
    fresh = Districting.from_assignment(g, state.assign, state.n_districts)
    assert state.dpops.tolist() == fresh.district_pops.tolist()
    assert state.dsize.tolist() == fresh.district_sizes.tolist()
    assert state.cut_edge_count == count_cut_edges(g, state.assign)
    a = state.assign
    for v in range(g.n_vertices):
        nb = g.neighbors(v)
        assert state.cut_deg[v] == np.count_nonzero(a[nb] != a[v])
    bnd = set(np.flatnonzero(state.cut_deg > 0).tolist())
    assert set(state.bnd_list[:state.boundary_size].tolist()) == bnd
    if state.encodes:
        assert state.state_code == encode(a, state.n_districts)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["flip", "single-vertex"]),
       beta=st.floats(0, 5), tol=st.sampled_from([0.2, 0.5, 1.0]))
def test_kernel_caches_stay_coherent(seed, kind, beta, tol):
    g = grid_graph(5, 5, pops=np.random.default_rng(seed).integers(1, 5, 25))
    plan = plan_of(g, [0] * 10 + [1] * 5 + [2] * 10, 3)
    state = ChainState(plan)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        trace = state.run(kind, rng, n_proposals=200, pop_tolerance=tol, beta_comp=beta,
                          beta_pop=beta / 10, flip_prob=0.2)
        assert len(trace) == 200
        assert trace.cut_counts[-1] == state.cut_edge_count
        _check_state(state)
        assert is_valid(g, state.to_plan())


@pytest.mark.parametrize("kind", ["flip", "single-vertex"])
def test_every_visited_state_is_valid_and_never_loses_tolerance(kind):
    g = grid_graph(4, 4)
    n = 3
    plan = plan_of(g, [0, 0, 1, 1] * 2 + [2] * 8, n)
    ideal = ideal_population(g, n)
    state = ChainState(plan)
    trace = state.run(kind, np.random.default_rng(5), n_proposals=20_000,
                      pop_tolerance=0.25, flip_prob=0.3)
    prev = tolerance_excess(plan.district_pops, ideal, 0.25)
    for code in np.unique(trace.codes):
        a = decode(int(code), n, 16)
        p = plan_of(g, a, n)
        assert is_valid(g, p)
    for code in trace.codes[trace.accepted]:
        e = tolerance_excess(np.bincount(decode(int(code), n, 16), minlength=n), ideal, 0.25)
        assert e <= prev + 1e-9
        prev = e


def test_flip_moves_are_reversible():
    """Every accepted flip can be undone by a single flip proposal."""
    g = grid_graph(4, 4)
    n = 2
    plan = plan_of(g, [0] * 8 + [1] * 8, n)
    state = ChainState(plan)
    trace = state.run("flip", np.random.default_rng(9), n_proposals=3000, flip_prob=0.4)
    prev = plan.assignment
    checked = 0
    for code, acc in zip(trace.codes, trace.accepted):
        cur = decode(int(code), n, 16)
        if acc and not np.array_equal(cur, prev):
            moved = np.flatnonzero(cur != prev)
            # one component: a spanning forest of the moved set, flagged, must rebuild it
            edges = [(int(u), int(v)) for u, v in g.edges if u in moved and v in moved]
            after = plan_of(g, cur, n)
            comps = boundary_components(g, after, FlipLabelling(frozenset(edges)))
            match = [c for c in comps if set(c.vertices) == set(moved.tolist())]
            assert len(match) == 1
            src = int(prev[moved[0]])
            assert src in match[0].neighbor_districts
            back = apply_flip_set(after, [(match[0], src)])
            assert np.array_equal(back.assignment, prev) and is_valid(g, back)
            checked += 1
        prev = cur
    assert checked > 100


def test_same_seed_same_trace():
    g = grid_graph(6, 6)
    plan = plan_of(g, [0] * 18 + [1] * 18)
    runs = []
    for _ in range(2):
        st_ = ChainState(plan)
        t = st_.run("flip", np.random.default_rng(42), n_proposals=5000, beta_comp=0.4,
                    pop_tolerance=0.2)
        runs.append((t.reasons.tobytes(), t.cut_counts.tobytes(), st_.assign.tobytes()))
    assert runs[0] == runs[1]


def test_target_accepted_stops_exactly():
    g = grid_graph(6, 6)
    plan = plan_of(g, [0] * 18 + [1] * 18)
    final, trace = run_chain(g, plan, ChainParams(2, pop_tolerance=0.3), 777,
                             np.random.default_rng(0))
    assert trace.n_accepted == 777 and trace[len(trace) - 1].accepted
    assert is_valid(g, final)


def test_zero_target_returns_initial_plan():
    g = grid_graph(3, 3)
    plan = plan_of(g, [0, 0, 0, 1, 1, 1, 2, 2, 2])
    final, trace = run_chain(g, plan, ChainParams(3), 0, np.random.default_rng(0))
    assert final.same_state(plan) and len(trace) == 0


def test_stall_detected(path4):
    plan = plan_of(grid_graph(1, 4), [0, 0, 1, 1])
    with pytest.raises(StallDetected):
        run_chain(plan.graph, plan, ChainParams(2, pop_tolerance=0.0), 10,
                  np.random.default_rng(0), stall_cap=500)


def test_single_vertex_without_boundary():
    g = grid_graph(2, 2)
    state = ChainState(plan_of(g, [0, 0, 0, 0]))
    with pytest.raises(NoBoundary):
        state.run("single-vertex", np.random.default_rng(0), n_proposals=1)


def test_trace_records():
    t = Trace([0, 1, 2, 3], [1.0, 0.5, 0.5, 0.5], [3, 3, 3, 3], step0=10)
    recs = list(t)
    assert [r.step_index for r in recs] == [10, 11, 12, 13]
    assert [r.rejected_reason for r in recs] == list(RejectReason)
    assert t.n_accepted == 1
    again = Trace.from_records(recs, t.cut_counts)
    assert again.reasons.tolist() == t.reasons.tolist()


def test_kernel_flip_matches_reference_law():
    """Compiled and pure-Python flip chains settle on the same distribution."""
    states, _ = enumerate_valid_plans(2, 3, 2)
    codes = np.array([encode(s, 2) for s in states])
    g = grid_graph(2, 3)
    plan = plan_of(g, [0, 0, 0, 1, 1, 1])
    params = ChainParams(2, beta_comp=1.0, flip_prob=0.3)

    rng = np.random.default_rng(2)
    ref = []
    p = plan
    for i in range(20_000):
        p, _ = propose_and_filter(g, p, params, None, rng)
        ref.append(encode(p.assignment, 2))
    ref_freq = np.array([np.mean(np.array(ref) == c) for c in codes])

    state = ChainState(plan)
    trace = state.run("flip", np.random.default_rng(3), n_proposals=200_000,
                      beta_comp=1.0, flip_prob=0.3)
    assert empirical_tv(trace.codes, codes, ref_freq) < 0.05


@pytest.mark.parametrize("coin,swap_rate", [(True, 0.0), (False, 2.0)])
def test_multi_component_modes_keep_caches(coin, swap_rate):
    g = grid_graph(8, 8)
    plan = plan_of(g, [0] * 16 + [1] * 16 + [2] * 16 + [3] * 16, 4)
    state = ChainState(plan)
    trace = state.run("flip", np.random.default_rng(0), n_proposals=20_000,
                      pop_tolerance=0.3, flip_prob=0.1, coin_selection=coin,
                      swap_rate=swap_rate)
    _check_state(state)
    assert is_valid(g, state.to_plan()) and trace.n_accepted > 0
