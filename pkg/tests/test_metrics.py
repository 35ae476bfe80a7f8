import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from redistmc.errors import DegenerateGraph, DegenerateWeight
from redistmc.graph import DualGraph, grid_graph
from redistmc.metrics import (ChainParams, acceptance_probability, compactness, pop_equality,
                              tolerance_excess,
                              weight, within_pop_tolerance)

from conftest import plan_of


@pytest.fixture
def lopsided():
    return DualGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)], pops=[3, 1, 1, 1])


def test_pop_equality(path4, lopsided):
    assert pop_equality(path4, plan_of(path4, [0, 0, 1, 1])) == 0
    assert pop_equality(lopsided, plan_of(lopsided, [0, 0, 1, 1])) == 2
    assert pop_equality(lopsided, plan_of(lopsided, [0, 0, 0, 0])) == 0


def test_pop_equality_fractional_ideal():
    g = DualGraph.from_edges(3, [(0, 1), (1, 2)], pops=[1, 1, 2])
    # ideal 2, pops 1 and 3
    assert pop_equality(g, plan_of(g, [0, 1, 1])) == 2
    g = DualGraph.from_edges(3, [(0, 1), (1, 2)], pops=[1, 1, 1])
    assert pop_equality(g, plan_of(g, [0, 1, 1])) == pytest.approx(1.0)


def test_compactness(path4, grid2):
    assert compactness(path4, plan_of(path4, [0, 0, 1, 1])) == pytest.approx(1 / 3)
    assert compactness(path4, plan_of(path4, [0, 0, 0, 0])) == 0
    assert compactness(grid2, plan_of(grid2, [0, 1, 0, 1])) == 0.5
    lonely = DualGraph.from_edges(1, [])
    with pytest.raises(DegenerateGraph):
        compactness(lonely, plan_of(lonely, [0]))


def test_weight_examples(path4, lopsided, grid2):
    assert weight(path4, plan_of(path4, [0, 1, 1, 1]), ChainParams(2)) == 1.0
    w = weight(lopsided, plan_of(lopsided, [0, 0, 1, 1]), ChainParams(2, beta_pop=1.0))
    assert w == pytest.approx(0.1353352832366127, abs=1e-12)
    w = weight(grid2, plan_of(grid2, [0, 1, 0, 1]), ChainParams(2, beta_comp=0.4))
    assert w == pytest.approx(0.8187307530779818, abs=1e-12)


def test_acceptance_probability():
    assert acceptance_probability(0.3, 0.3) == 1
    assert acceptance_probability(0.5, 1.0) == 0.5
    assert acceptance_probability(0.9, 0.2) == 1
    with pytest.raises(DegenerateWeight):
        acceptance_probability(0.5, 0.0)


def test_within_pop_tolerance(path4, lopsided):
    assert within_pop_tolerance(path4, plan_of(path4, [0, 0, 1, 1]), 0.0)
    plan = plan_of(lopsided, [0, 0, 1, 1])
    assert not within_pop_tolerance(lopsided, plan, 0.1)
    assert within_pop_tolerance(lopsided, plan, 0.5)


def test_tolerance_extremes(lopsided):
    balanced = plan_of(lopsided, [0, 1, 1, 1])
    assert within_pop_tolerance(lopsided, balanced, 0.0)
    skewed = plan_of(lopsided, [0, 0, 1, 1])
    assert within_pop_tolerance(lopsided, skewed, 1.0)
    assert not within_pop_tolerance(lopsided, skewed, 0.0)


def test_full_tolerance_is_unconstrained():
    g = grid_graph(1, 7)
    plan = plan_of(g, [0, 0, 0, 0, 0, 1, 2])  # district 0 holds 5 > 2 * 7/3
    assert within_pop_tolerance(g, plan, 1.0)
    assert not within_pop_tolerance(g, plan, 0.99)
    assert tolerance_excess(plan.district_pops, 7 / 3, 1.0) == 0.0
    assert tolerance_excess(plan.district_pops, 7 / 3, 0.5) == pytest.approx(
        (5 - 7 / 3 - 7 / 6) + 2 * (7 / 3 - 1 - 7 / 6))


def test_chain_params_validation():
    with pytest.raises(ValueError):
        ChainParams(2, pop_tolerance=1.5)
    with pytest.raises(ValueError):
        ChainParams(2, flip_prob=1.0)
    with pytest.raises(ValueError):
        ChainParams(2, beta_comp=-1)


positive = st.floats(1e-6, 1e3)


@given(positive, positive)
def test_detailed_balance_identity(w1, w2):
    lhs = w1 * acceptance_probability(w2, w1)
    rhs = w2 * acceptance_probability(w1, w2)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert lhs == pytest.approx(min(w1, w2), rel=1e-12)


@given(positive, positive, st.floats(1e-3, 1e3))
def test_acceptance_scale_invariant(w1, w2, c):
    assert acceptance_probability(c * w1, c * w2) == pytest.approx(
        acceptance_probability(w1, w2), rel=1e-9)


@given(st.floats(0, 10), st.floats(0, 10), st.integers(0, 20), st.integers(0, 20))
def test_weight_monotone(b1, b2, a, b):
    # weight is exp(-(b1*pop_eq + b2*comp)); evaluate the closed form directly
    def w(pe, comp):
        return math.exp(-(b1 * pe + b2 * comp))
    lo, hi = sorted((a, b))
    assert w(hi, 0.3) <= w(lo, 0.3)
    assert w(5, hi / 20) <= w(5, lo / 20)
