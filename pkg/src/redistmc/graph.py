"""Dual graph and districting plans.

The graph is stored in CSR form (``indptr``/``indices``) with dense integer
vertex ids so the numba kernels can walk it directly. Original string ids
live in a side table for ingest and serialization.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGraph, DisconnectedGraph, InvalidPlan, UnknownDistrict


@dataclass(frozen=True, eq=False)
class DualGraph:
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray  # (E, 2), u < v, lexicographically sorted
    pops: np.ndarray
    dem: np.ndarray
    rep: np.ndarray
    ids: tuple = field(default=())

    @classmethod
    def from_edges(cls, n_vertices, edges, pops=None, dem=None, rep=None, ids=None,
                   require_connected=True):
        """Build a graph from an undirected edge iterable.

        Self-loops are rejected; duplicate edges (in either orientation)
        are collapsed.
        """
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise DegenerateGraph(f"self-loop at vertex {u}")
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise DegenerateGraph(f"edge ({u}, {v}) out of range")
            canon.add((min(u, v), max(u, v)))
        edge_arr = np.array(sorted(canon), dtype=np.int64).reshape(-1, 2)

        nbrs = [[] for _ in range(n_vertices)]
        for u, v in edge_arr:
            nbrs[u].append(v)
            nbrs[v].append(u)
        indptr = np.zeros(n_vertices + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in nbrs])
        indices = np.array([x for a in nbrs for x in sorted(a)], dtype=np.int64)

        def _col(values, default):
            if values is None:
                return np.full(n_vertices, default, dtype=np.int64)
            arr = np.asarray(values, dtype=np.int64)
            if arr.shape != (n_vertices,):
                raise DegenerateGraph("per-vertex array has wrong length")
            if (arr < 0).any():
                raise DegenerateGraph("populations and votes must be nonnegative")
            return arr

        if ids is None:
            ids = tuple(str(i) for i in range(n_vertices))
        graph = cls(indptr=indptr, indices=indices, edges=edge_arr,
                    pops=_col(pops, 1), dem=_col(dem, 0), rep=_col(rep, 0),
                    ids=tuple(ids))
        for arr in (graph.indptr, graph.indices, graph.edges, graph.pops,
                    graph.dem, graph.rep):
            arr.setflags(write=False)
        if require_connected and n_vertices > 0 and not graph.is_connected():
            raise DisconnectedGraph("dual graph is not connected")
        return graph

    @property
    def n_vertices(self):
        return len(self.indptr) - 1

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def total_pop(self):
        return int(self.pops.sum())

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v):
        return int(self.indptr[v + 1] - self.indptr[v])

    def is_connected(self):
        n = self.n_vertices
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if not seen[y]:
                    seen[y] = True
                    count += 1
                    queue.append(y)
        return count == n

    def index_of(self):
        return {name: i for i, name in enumerate(self.ids)}


def grid_graph(rows, cols, pops=None, dem=None, rep=None):
    """Rook-adjacent ``rows`` x ``cols`` lattice, vertex id = r * cols + c."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return DualGraph.from_edges(rows * cols, edges, pops=pops, dem=dem, rep=rep)


class Districting:
    """An n-coloring of a :class:`DualGraph` with cached statistics.

    ``district_pops``, ``district_sizes`` and ``cut_edge_count`` are kept
    coherent with ``assignment`` by every mutating path. A Districting may
    transiently be invalid (a disconnected or empty district); callers gate
    on :func:`is_valid`.
    """

    __slots__ = ("graph", "assignment", "n_districts", "district_pops",
                 "district_sizes", "cut_edge_count")

    def __init__(self, graph, assignment, n_districts, district_pops,
                 district_sizes, cut_edge_count):
        self.graph = graph
        self.assignment = assignment
        self.n_districts = n_districts
        self.district_pops = district_pops
        self.district_sizes = district_sizes
        self.cut_edge_count = cut_edge_count

    @classmethod
    def from_assignment(cls, graph, assignment, n_districts=None):
        assign = np.array(assignment, dtype=np.int64).copy()
        if assign.shape != (graph.n_vertices,):
            raise InvalidPlan("assignment must cover every vertex exactly once")
        if n_districts is None:
            n_districts = int(assign.max()) + 1 if len(assign) else 0
        if len(assign) and (assign.min() < 0 or assign.max() >= n_districts):
            raise UnknownDistrict("district label outside 0..n-1")
        pops = np.bincount(assign, weights=graph.pops, minlength=n_districts)
        sizes = np.bincount(assign, minlength=n_districts)
        return cls(graph, assign, int(n_districts), pops.astype(np.int64),
                   sizes.astype(np.int64), count_cut_edges(graph, assign))

    def copy(self):
        return Districting(self.graph, self.assignment.copy(), self.n_districts,
                           self.district_pops.copy(), self.district_sizes.copy(),
                           self.cut_edge_count)

    def same_state(self, other):
        return (self.n_districts == other.n_districts
                and np.array_equal(self.assignment, other.assignment)
                and np.array_equal(self.district_pops, other.district_pops)
                and np.array_equal(self.district_sizes, other.district_sizes)
                and self.cut_edge_count == other.cut_edge_count)

    def __repr__(self):
        return (f"Districting(n={self.n_districts}, cut={self.cut_edge_count}, "
                f"pops={self.district_pops.tolist()})")


def count_cut_edges(graph, assignment):
    e = graph.edges
    if len(e) == 0:
        return 0
    return int(np.count_nonzero(assignment[e[:, 0]] != assignment[e[:, 1]]))


def cut_edges(graph, plan):
    """Edges whose endpoints carry different labels, in canonical order."""
    e = graph.edges
    mask = plan.assignment[e[:, 0]] != plan.assignment[e[:, 1]]
    return [(int(u), int(v)) for u, v in e[mask]]


def _district_members(plan):
    members = [[] for _ in range(plan.n_districts)]
    for v, d in enumerate(plan.assignment):
        members[d].append(v)
    return members


def _induced_connected(graph, assignment, vertices):
    if not vertices:
        return False
    label = assignment[vertices[0]]
    seen = {vertices[0]}
    queue = deque([vertices[0]])
    while queue:
        x = queue.popleft()
        for y in graph.neighbors(x):
            y = int(y)
            if assignment[y] == label and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(vertices)


def is_valid(graph, plan):
    """True iff every district is nonempty and induces a connected subgraph."""
    return all(_induced_connected(graph, plan.assignment, m)
               for m in _district_members(plan))


def district_components(graph, plan):
    members = _district_members(plan)
    for i, m in enumerate(members):
        if not _induced_connected(graph, plan.assignment, m):
            raise InvalidPlan(f"district {i} is empty or disconnected")
    return [set(m) for m in members]


def district_population(graph, plan, district):
    if not 0 <= district < plan.n_districts:
        raise UnknownDistrict(f"district {district} not in 0..{plan.n_districts - 1}")
    return int(graph.pops[plan.assignment == district].sum())


def flip_vertex(plan, v, new_label):
    """Return a copy of ``plan`` with vertex ``v`` relabelled.

    Caches are patched in O(deg(v)). The result is not validity-checked.
    """
    if not 0 <= new_label < plan.n_districts:
        raise UnknownDistrict(f"district {new_label} not in 0..{plan.n_districts - 1}")
    out = plan.copy()
    _relabel_inplace(out, v, new_label)
    return out


def _relabel_inplace(plan, v, new_label):
    old = int(plan.assignment[v])
    if old == new_label:
        return
    graph = plan.graph
    delta = 0
    for u in graph.neighbors(v):
        a = int(plan.assignment[u])
        delta += (a != new_label) - (a != old)
    pop = int(graph.pops[v])
    plan.district_pops[old] -= pop
    plan.district_pops[new_label] += pop
    plan.district_sizes[old] -= 1
    plan.district_sizes[new_label] += 1
    plan.cut_edge_count += int(delta)
    plan.assignment[v] = new_label
