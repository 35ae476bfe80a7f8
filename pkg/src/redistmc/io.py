"""File formats: unit graphs, plan files and JSON-lines ensembles.

All documents carry ``format_version``. Output is written with sorted keys
and fixed separators so identical runs give byte-identical files.
"""
from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .analysis import Ensemble, seats_won, tied_districts
from .errors import (AsymmetricAdjacency, CoherenceError, DanglingReference,
                     DegenerateGeometry, ParseError)
from .graph import Districting, DualGraph
from .metrics import compactness, pop_equality

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
QUANTUM = 1e-7


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------- geometry

def _ring_points(ring):
    pts = []
    for p in ring:
        try:
            x, y = float(p[0]), float(p[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise DegenerateGeometry(f"bad coordinate {p!r}") from exc
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DegenerateGeometry("non-finite coordinate")
        pts.append((round(x / QUANTUM), round(y / QUANTUM)))
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    # drop consecutive repeats introduced by quantization
    pts = [p for i, p in enumerate(pts) if p != pts[i - 1]] if len(pts) > 1 else pts
    if len(set(pts)) < 3:
        raise DegenerateGeometry("ring has fewer than three distinct vertices")
    area2 = sum(pts[i][0] * pts[i - 1][1] - pts[i - 1][0] * pts[i][1]
                for i in range(len(pts)))
    if area2 == 0:
        raise DegenerateGeometry("ring has zero area")
    return pts


def derive_adjacency(geometry):
    """Rook adjacency from polygon rings.

    ``geometry[i]`` is a list of rings (each a list of ``[x, y]`` pairs) for
    unit ``i``. Two units are adjacent iff they share at least one edge
    segment after snapping coordinates to a 1e-7 grid; a shared corner
    alone does not count.
    """
    owners = defaultdict(set)
    for unit, rings in enumerate(geometry):
        if not rings:
            raise DegenerateGeometry(f"unit {unit} has no rings")
        for ring in rings:
            pts = _ring_points(ring)
            for i in range(len(pts)):
                a, b = pts[i - 1], pts[i]
                owners[(a, b) if a < b else (b, a)].add(unit)
    adj = [set() for _ in geometry]
    for units in owners.values():
        for u in units:
            adj[u] |= units - {u}
    return [sorted(a) for a in adj]


# ------------------------------------------------------------------ unit graph

def parse_unit_graph(doc, strict_adjacency=False):
    """Build a DualGraph from a parsed UnitGraphFile document."""
    try:
        units = doc["units"]
        ids = [str(u["id"]) for u in units]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field: {exc}") from exc
    if len(set(ids)) != len(ids):
        raise ParseError("unit ids are not unique")
    index = {name: i for i, name in enumerate(ids)}

    have_adj = all("adj" in u for u in units)
    if not have_adj:
        if not all(u.get("geometry") for u in units):
            raise ParseError("every unit needs either 'adj' or 'geometry'")
        adj = derive_adjacency([u["geometry"] for u in units])
    else:
        adj = []
        for u in units:
            row = []
            for ref in u["adj"]:
                if str(ref) not in index:
                    raise DanglingReference(f"unit {u['id']} references unknown id {ref!r}")
                row.append(index[str(ref)])
            adj.append(row)

    edges = set()
    asym = []
    for i, row in enumerate(adj):
        for j in row:
            if i == j:
                raise ParseError(f"unit {ids[i]} lists itself as a neighbour")
            edges.add((min(i, j), max(i, j)))
            if i not in adj[j]:
                asym.append((ids[i], ids[j]))
    if asym:
        if strict_adjacency:
            raise AsymmetricAdjacency(f"{len(asym)} one-sided adjacencies, e.g. {asym[0]}")
        log.warning("symmetrized %d one-sided adjacencies", len(asym))

    def col(key):
        try:
            vals = [int(u.get(key, 0)) for u in units]
        except (TypeError, ValueError) as exc:
            raise ParseError(f"non-integer {key!r}") from exc
        if any(v < 0 for v in vals):
            raise ParseError(f"negative {key!r}")
        return vals

    pops, dem, rep = col("pop"), col("dem"), col("rep")
    silent = sum(1 for d, r in zip(dem, rep) if d == 0 and r == 0)
    if silent:
        log.warning("%d units have no recorded votes", silent)
    return DualGraph.from_edges(len(units), sorted(edges), pops=pops, dem=dem, rep=rep,
                                ids=ids)


def load_unit_graph(path, strict_adjacency=False):
    return parse_unit_graph(_read_json(path), strict_adjacency=strict_adjacency)


def unit_graph_doc(graph):
    """Normalized UnitGraphFile document (explicit, symmetric adjacency)."""
    units = []
    for v, name in enumerate(graph.ids):
        units.append({"id": name, "pop": int(graph.pops[v]), "dem": int(graph.dem[v]),
                      "rep": int(graph.rep[v]),
                      "adj": [graph.ids[u] for u in graph.neighbors(v)]})
    return {"format_version": FORMAT_VERSION, "units": units}


def save_unit_graph(graph, path):
    Path(path).write_text(dumps(unit_graph_doc(graph)) + "\n", encoding="utf-8")


# ------------------------------------------------------------------------ plans

def plan_doc(graph, plan, label=""):
    return {"format_version": FORMAT_VERSION,
            "metadata": {"n_districts": plan.n_districts, "label": label},
            "plan": {graph.ids[v]: int(d) for v, d in enumerate(plan.assignment)}}


def parse_plan(graph, doc):
    try:
        mapping = doc["plan"]
        n = int(doc.get("metadata", {}).get("n_districts", 0)) or None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad plan file: {exc}") from exc
    index = graph.index_of()
    if set(mapping) != set(index):
        missing = set(index) - set(mapping)
        extra = set(mapping) - set(index)
        raise ParseError(f"plan does not cover the units exactly "
                         f"({len(missing)} missing, {len(extra)} unknown)")
    assign = np.zeros(graph.n_vertices, dtype=np.int64)
    for name, d in mapping.items():
        assign[index[name]] = int(d)
    plan = Districting.from_assignment(graph, assign, n)
    if np.any(plan.district_sizes == 0):
        raise ParseError("plan labels are not dense 0..n-1")
    return plan


def load_plan(graph, path):
    return parse_plan(graph, _read_json(path))


def save_plan(graph, plan, path, label=""):
    Path(path).write_text(dumps(plan_doc(graph, plan, label)) + "\n", encoding="utf-8")


# --------------------------------------------------------------------- ensembles

def _ensemble_lines(graph, ensemble):
    yield dumps({"format_version": FORMAT_VERSION, "kind": "header",
                 "n_districts": ensemble.n_districts, "n_plans": len(ensemble),
                 "provenance": ensemble.provenance})
    for i in range(len(ensemble)):
        a = ensemble.assignments[i]
        yield dumps({"kind": "plan", "index": i,
                     "metadata": {"n_districts": ensemble.n_districts, "label": f"plan-{i}"},
                     "plan": {graph.ids[v]: int(d) for v, d in enumerate(a)},
                     "pop_eq": float(ensemble.pop_eq[i]), "comp": float(ensemble.comp[i]),
                     "seats": int(ensemble.seats[i]), "ties": int(ensemble.ties[i])})


def save_ensemble(graph, ensemble, path):
    with open(path, "w", encoding="utf-8") as fh:
        for line in _ensemble_lines(graph, ensemble):
            fh.write(line + "\n")


def load_ensemble(graph, path, check_fraction=0.05, seed=0):
    """Read an ensemble and recompute scores on a random subset of plans.

    At least one plan is checked whenever the file is nonempty; pass
    ``check_fraction=1`` to verify every record.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        records = [json.loads(x) for x in lines if x.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not records or records[0].get("kind") != "header":
        raise ParseError("ensemble file must start with a header record")
    header, body = records[0], records[1:]
    n = int(header["n_districts"])
    index = graph.index_of()
    assigns = np.zeros((len(body), graph.n_vertices), dtype=np.int64)
    try:
        for i, rec in enumerate(body):
            for name, d in rec["plan"].items():
                assigns[i, index[name]] = int(d)
        ens = Ensemble(assigns, n,
                       np.array([r["pop_eq"] for r in body], dtype=np.float64),
                       np.array([r["comp"] for r in body], dtype=np.float64),
                       np.array([r["seats"] for r in body], dtype=np.int64),
                       np.array([r.get("ties", 0) for r in body], dtype=np.int64),
                       header.get("provenance", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad ensemble record: {exc}") from exc
    if body:
        k = max(1, math.ceil(check_fraction * len(body)))
        picks = np.random.default_rng(seed).choice(len(body), size=min(k, len(body)),
                                                   replace=False)
        for i in sorted(picks):
            _check_record(graph, ens, int(i))
    return ens


def _check_record(graph, ens, i):
    plan = ens.plan(graph, i)
    checks = (("seats", seats_won(graph, plan), ens.seats[i]),
              ("ties", tied_districts(graph, plan), ens.ties[i]),
              ("pop_eq", pop_equality(graph, plan), ens.pop_eq[i]),
              ("comp", compactness(graph, plan), ens.comp[i]))
    for name, fresh, stored in checks:
        if not math.isclose(fresh, stored, rel_tol=1e-12, abs_tol=1e-12):
            raise CoherenceError(f"plan {i}: stored {name}={stored} but recomputed {fresh}")
