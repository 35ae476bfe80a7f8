import math

import numpy as np
import pytest

from redistmc.chain import RejectReason
from redistmc.errors import NoBoundary
from redistmc.graph import grid_graph
from redistmc.metrics import ChainParams
from redistmc.proposals import (BoundaryComponent, FlipLabelling, apply_flip_set,
                                boundary_components, boundary_vertices, label_flip_edges,
                                metropolis_accept, propose_and_filter, select_flip_set,
                                single_vertex_chain_step)

from conftest import plan_of


def comp(verts, district, nbrs):
    return BoundaryComponent(frozenset(verts), district, frozenset(nbrs))


def test_labelling_skips_cut_edges(path4, scripted):
    plan = plan_of(path4, [0, 0, 1, 1])
    lab = label_flip_edges(path4, plan, 0.5, scripted(uniforms=[0.1, 0.1]))
    assert lab.flagged == {(0, 1), (2, 3)}
    lab = label_flip_edges(path4, plan, 0.5, scripted(uniforms=[0.9, 0.1]))
    assert lab.flagged == {(2, 3)}


def test_labelling_flag_rate():
    g = grid_graph(10, 10)
    plan = plan_of(g, [0] * 100)
    rng = np.random.default_rng(0)
    n = sum(len(label_flip_edges(g, plan, 0.2, rng).flagged) for _ in range(200))
    assert n / (200 * g.n_edges) == pytest.approx(0.2, abs=0.01)


def test_boundary_components_examples(path4, grid2):
    plan = plan_of(path4, [0, 0, 1, 1])
    comps = boundary_components(path4, plan, FlipLabelling(frozenset({(0, 1)})))
    assert [set(c.vertices) for c in comps] == [{0, 1}, {2}]
    assert comps[0].neighbor_districts == {1} and comps[1].neighbor_districts == {0}

    comps = boundary_components(path4, plan, FlipLabelling(frozenset()))
    assert [set(c.vertices) for c in comps] == [{1}, {2}]

    mono = plan_of(grid2, [0, 0, 0, 0])
    assert boundary_components(grid2, mono, FlipLabelling(frozenset({(0, 1)}))) == []


def test_boundary_component_with_two_neighbour_districts():
    g = grid_graph(1, 3)
    comps = boundary_components(g, plan_of(g, [0, 1, 2]), FlipLabelling(frozenset()))
    assert comps[1].neighbor_districts == {0, 2}


def test_select_coin_mode(path4, scripted):
    c = comp({2}, 1, {0})
    kept = select_flip_set(path4, [c], scripted(uniforms=[0.3]), coin=True)
    assert kept == [(c, 0)]
    assert select_flip_set(path4, [c], scripted(uniforms=[0.7]), coin=True) == []


def test_select_skips_adjacent_component(path4, scripted):
    a, b = comp({1}, 0, {1}), comp({2}, 1, {0})
    flips = select_flip_set(path4, [a, b], scripted(uniforms=[0.1, 0.1]), coin=True)
    assert flips == [(a, 1)]


def test_select_forced_target_index(scripted):
    g = grid_graph(1, 3)
    c = comp({1}, 0, {1, 2})
    assert select_flip_set(g, [c], scripted(ints=[0, 1])) == [(c, 2)]
    assert select_flip_set(g, [c], scripted(ints=[0, 0])) == [(c, 1)]


def test_select_default_keeps_exactly_one(scripted):
    g = grid_graph(1, 6)
    comps = [comp({0}, 0, {1}), comp({3}, 1, {0}), comp({5}, 1, {0})]
    flips = select_flip_set(g, comps, scripted(ints=[2, 0]))
    assert flips == [(comps[2], 0)]


def test_select_empty(path4, scripted):
    assert select_flip_set(path4, [], scripted()) == []


def test_apply_flip_set(path4, grid2):
    plan = plan_of(grid2, [0, 0, 1, 1])
    out = apply_flip_set(plan, [(comp({2}, 1, {0}), 0)])
    assert out.assignment.tolist() == [0, 0, 0, 1]
    assert out.district_pops.tolist() == [3, 1]
    assert apply_flip_set(plan, []).same_state(plan)

    plan = plan_of(path4, [0, 0, 1, 1])
    out = apply_flip_set(plan, [(comp({2, 3}, 1, {0}), 0)])
    assert out.assignment.tolist() == [0, 0, 0, 0]


def test_metropolis_accept_forced(scripted):
    assert metropolis_accept(math.log(0.5), scripted(uniforms=[0.4]))
    assert not metropolis_accept(math.log(0.5), scripted(uniforms=[0.6]))
    # a ratio of one never consumes a draw
    rng = scripted(uniforms=[0.999])
    assert metropolis_accept(0.0, rng) and rng.uniforms == [0.999]


def test_flip_step_splitting_district_rejected(grid3, scripted):
    plan = plan_of(grid3, [0, 0, 0, 1, 1, 1, 2, 2, 2])
    # no flags; pick component {4} (Fisher-Yates index 4), first target (district 0)
    rng = scripted(ints=[4, 0], default_uniform=0.99)
    nxt, rec = propose_and_filter(grid3, plan, ChainParams(3), None, rng)
    assert rec.rejected_reason is RejectReason.INVALID_CONTIGUITY and not rec.accepted
    assert nxt.same_state(plan)


def test_flip_step_tolerance_rejected(path4, scripted):
    plan = plan_of(path4, [0, 0, 1, 1])
    rng = scripted(ints=[0, 0])
    nxt, rec = propose_and_filter(path4, plan, ChainParams(2, pop_tolerance=0.1), None, rng)
    assert rec.rejected_reason is RejectReason.TOLERANCE
    assert nxt.same_state(plan)


def test_flip_step_metropolis_forced(path4, scripted):
    plan = plan_of(path4, [0, 0, 1, 1])
    params = ChainParams(2, beta_comp=3.0)
    # flipping v1 into district 1 keeps one cut edge: ratio 1, accepted
    nxt, rec = propose_and_filter(path4, plan, params, None, scripted(ints=[0, 0]))
    assert rec.accepted and nxt.assignment.tolist() == [0, 1, 1, 1]
    # with population pressure the same move is rejected unless u is small
    params = ChainParams(2, beta_pop=1.0)
    ratio = math.exp(-2.0)  # pop_eq goes 0 -> 2 (pops 3,3 -> 2,4)
    nxt, rec = propose_and_filter(path4, plan, params, None,
                                  scripted(ints=[0, 0], uniforms=[0.99, 0.99, ratio * 1.01]))
    assert rec.rejected_reason is RejectReason.METROPOLIS and nxt.same_state(plan)
    nxt, rec = propose_and_filter(path4, plan, params, None,
                                  scripted(ints=[0, 0], uniforms=[0.99, 0.99, ratio * 0.99]))
    assert rec.accepted and nxt.district_pops.tolist() == [2, 4]


def test_flip_step_beta_zero_accepts_every_valid_proposal():
    g = grid_graph(4, 4)
    plan = plan_of(g, [0] * 8 + [1] * 8)
    rng = np.random.default_rng(3)
    for i in range(300):
        plan, rec = propose_and_filter(g, plan, ChainParams(2, flip_prob=0.2), None, rng,
                                       step_index=i)
        assert rec.rejected_reason in (RejectReason.NONE, RejectReason.INVALID_CONTIGUITY)
        assert rec.step_index == i


def test_single_vertex_forced(path4, scripted):
    plan = plan_of(path4, [0, 0, 1, 1])
    assert boundary_vertices(path4, plan) == [1, 2]
    nxt, rec = single_vertex_chain_step(path4, plan, ChainParams(2), scripted(ints=[0, 0]))
    assert rec.accepted and nxt.assignment.tolist() == [0, 1, 1, 1]
    nxt, rec = single_vertex_chain_step(path4, plan, ChainParams(2), scripted(ints=[1, 0]))
    assert rec.accepted and nxt.assignment.tolist() == [0, 0, 0, 1]


def test_single_vertex_requires_boundary(grid2, scripted):
    with pytest.raises(NoBoundary):
        single_vertex_chain_step(grid2, plan_of(grid2, [0, 0, 0, 0]), ChainParams(1),
                                 scripted())


def test_single_vertex_hastings_ratio(scripted):
    # 1x3 path [0,1,1]: boundary {0,1}; moving v1 to 0 gives [0,0,1], boundary {1,2}
    g = grid_graph(1, 3)
    plan = plan_of(g, [0, 1, 1])
    # forward: 1/|B| * 1/cut_deg = 1/2 * 1; back: 1/|B'| * 1/(deg - c_new) = 1/2 * 1
    nxt, rec = single_vertex_chain_step(g, plan, ChainParams(2), scripted(ints=[1, 0]))
    assert rec.accepted


def test_reference_single_vertex_is_stationary():
    """Reference chain on a 2x3 grid against the brute-force uniform law."""
    from conftest import empirical_tv, encode, enumerate_valid_plans

    states, _ = enumerate_valid_plans(2, 3, 2)
    codes = np.array([encode(s, 2) for s in states])
    g = grid_graph(2, 3)
    plan = plan_of(g, [0, 0, 0, 1, 1, 1])
    rng = np.random.default_rng(11)
    seen = []
    for _ in range(20_000):
        plan, _rec = single_vertex_chain_step(g, plan, ChainParams(2), rng)
        seen.append(encode(plan.assignment, 2))
    tv = empirical_tv(np.array(seen), codes, np.full(len(codes), 1 / len(codes)))
    assert tv < 0.06
