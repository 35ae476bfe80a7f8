import numpy as np
import pytest

from redistmc.graph import Districting, DualGraph, grid_graph


class ScriptedRng:
    """Stand-in for a numpy Generator that replays scripted draws.

    ``random()`` pops from ``uniforms`` (then returns ``default_uniform``);
    ``integers(low, high)`` pops from ``ints`` (then returns ``low``).
    """

    def __init__(self, uniforms=(), ints=(), default_uniform=0.99):
        self.uniforms = list(uniforms)
        self.ints = list(ints)
        self.default_uniform = default_uniform

    def random(self):
        return self.uniforms.pop(0) if self.uniforms else self.default_uniform

    def integers(self, low, high=None):
        if high is None:
            low, high = 0, low
        value = self.ints.pop(0) if self.ints else low
        assert low <= value < high, (low, value, high)
        return value

    def poisson(self, lam):
        return 0


@pytest.fixture
def scripted():
    return ScriptedRng


@pytest.fixture
def path4():
    return DualGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)], pops=[2, 1, 1, 2],
                                dem=[5, 5, 0, 0], rep=[0, 0, 5, 5])


@pytest.fixture
def grid2():
    return grid_graph(2, 2)


@pytest.fixture
def grid3():
    return grid_graph(3, 3)


def plan_of(graph, labels, n=None):
    return Districting.from_assignment(graph, np.asarray(labels), n)


def quadrant_plan(graph, rows, cols):
    a = [(r >= rows // 2) * 2 + (c >= cols // 2) for r in range(rows) for c in range(cols)]
    return plan_of(graph, a, 4)


def six_by_six_votes():
    """Fixed pseudo-random Democratic shares in [25, 75] out of 100 votes per unit."""
    dem = [int(np.random.default_rng(v + 11).integers(25, 76)) for v in range(36)]
    return dem, [100 - d for d in dem]


def enumerate_valid_plans(rows, cols, n, tol=None):
    """Brute-force every contiguous n-district plan of a unit-population grid.

    Contiguity is judged by networkx, independently of the package. With
    ``tol`` set, plans with a district deviating by more than ``tol * ideal``
    are dropped.
    """
    import itertools

    import networkx as nx

    G = nx.convert_node_labels_to_integers(nx.grid_2d_graph(rows, cols), ordering="sorted")
    nv = rows * cols
    ideal = nv / n
    out = []
    for lab in itertools.product(range(n), repeat=nv):
        lab = np.array(lab)
        pops = np.bincount(lab, minlength=n)
        if np.any(pops == 0):
            continue
        if tol is not None and np.any(np.abs(pops - ideal) > tol * ideal + 1e-9):
            continue
        if all(nx.is_connected(G.subgraph(np.flatnonzero(lab == d).tolist())) for d in range(n)):
            out.append(lab)
    return np.array(out), G


def encode(labels, n):
    return int(sum(int(d) * n ** v for v, d in enumerate(labels)))


def decode(code, n, nv):
    return np.array([(code // n ** v) % n for v in range(nv)])


def empirical_tv(codes, state_codes, target):
    """Total variation between visit frequencies of ``codes`` and ``target``."""
    order = np.argsort(state_codes)
    sorted_codes = state_codes[order]
    pos = np.searchsorted(sorted_codes, codes)
    assert np.all(sorted_codes[pos] == codes), "chain left the enumerated state space"
    emp = np.bincount(pos, minlength=len(state_codes)) / len(codes)
    return 0.5 * float(np.abs(emp - np.asarray(target)[order]).sum())
