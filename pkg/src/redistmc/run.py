"""Run configuration and ensemble generation.

Plan ``i`` of a run always comes from its own chain, seeded by the ``i``-th
child of ``SeedSequence(seed)`` and started from the same initial plan, so
the output does not depend on how many worker processes share the work.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .analysis import Ensemble
from .annealing import AnnealSchedule, run_annealed_sample
from .chain import ChainState
from .diagnostics import acceptance_summary
from .errors import ParseError
from .graph import Districting
from .metrics import ChainParams

KINDS = ("flip", "single-vertex", "anneal")


@dataclass
class RunConfig:
    params: ChainParams
    kind: str = "anneal"
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    n_plans: int = 50
    n_steps: int = 3000
    n_chains: int = 1
    seed: int = 0
    swap_rate: float = 0.0
    graph: str | None = None
    init: str | None = None
    out: str = "out"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParseError(f"kind must be one of {KINDS}")
        if self.n_plans < 0 or self.n_steps < 0 or self.n_chains < 1:
            raise ParseError("n_plans and n_steps must be >= 0, n_chains >= 1")

    @classmethod
    def from_dict(cls, doc, base_dir=None):
        """Parse a config document; relative paths resolve against ``base_dir``."""
        doc = dict(doc)
        doc.pop("format_version", None)
        try:
            pdoc = dict(doc.pop("params"))
            if "lambda" in pdoc:
                pdoc["flip_prob"] = pdoc.pop("lambda")
            params = ChainParams(**pdoc)
            schedule = AnnealSchedule(**doc.pop("schedule", {}))
            known = {f.name for f in fields(cls)}
            unknown = set(doc) - known
            if unknown:
                raise ParseError(f"unknown config keys {sorted(unknown)}")
            cfg = cls(params=params, schedule=schedule, **doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad run config: {exc}") from exc
        if base_dir is not None:
            for key in ("graph", "init"):
                val = getattr(cfg, key)
                if val is not None and not Path(val).is_absolute():
                    setattr(cfg, key, str(Path(base_dir) / val))
        return cfg

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: {exc}") from exc
        return cls.from_dict(doc, base_dir=Path(path).parent)

    def to_dict(self):
        d = asdict(self)
        d["format_version"] = 1
        return d

    def provenance(self):
        return {"kind": self.kind, "seed": self.seed, "params": asdict(self.params),
                "schedule": asdict(self.schedule), "n_steps": self.n_steps,
                "swap_rate": self.swap_rate}


def sample_plan(graph, initial_plan, config, seed_seq):
    """One ensemble member: run a fresh chain from ``initial_plan``."""
    rng = np.random.default_rng(seed_seq)
    p = config.params
    if config.kind == "anneal":
        return run_annealed_sample(graph, initial_plan, p, config.schedule, rng,
                                   swap_rate=config.swap_rate)
    state = ChainState(initial_plan)
    trace = state.run(config.kind, rng, target_accepted=config.n_steps,
                      pop_tolerance=p.pop_tolerance, beta_comp=p.beta_comp,
                      beta_pop=p.beta_pop, flip_prob=p.flip_prob, swap_rate=config.swap_rate)
    return state.to_plan(), trace


def _job(graph, assignment, n_districts, config, seed_seq):
    plan = Districting.from_assignment(graph, assignment, n_districts)
    final, trace = sample_plan(graph, plan, config, seed_seq)
    return final.assignment, trace


def run_ensemble(graph, initial_plan, config):
    """Generate ``config.n_plans`` plans. Returns (Ensemble, list of traces)."""
    children = np.random.SeedSequence(config.seed).spawn(config.n_plans)
    jobs = [(graph, initial_plan.assignment, initial_plan.n_districts, config, c)
            for c in children]
    if config.n_chains > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.n_chains) as pool:
            results = list(pool.map(_job, *zip(*jobs)))
    else:
        results = [_job(*j) for j in jobs]
    plans = [Districting.from_assignment(graph, a, initial_plan.n_districts)
             for a, _ in results]
    ensemble = Ensemble.from_plans(graph, plans, config.provenance())
    ensemble.n_districts = initial_plan.n_districts
    return ensemble, [t for _, t in results]


def trace_lines(traces):
    for i, t in enumerate(traces):
        yield json.dumps({"chain": i, "statistic": "cut_edge_count",
                          "values": t.cut_counts.tolist(), "reasons": t.reasons.tolist(),
                          "summary": acceptance_summary(t)},
                         sort_keys=True, separators=(",", ":"))
