"""Command-line entry point.

Subcommands: ingest, seed, run, diagnose, analyze. Exit status is 0 on
success, 1 on validation failures and 2 when a chain stalls or fails to
converge; failures also print a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, io
from .diagnostics import ChainTrace, gelman_rubin, min_steps_search
from .errors import NotConverged, ParseError, RedistError
from .run import RunConfig, run_ensemble, trace_lines
from .seeding import seed_plan

log = logging.getLogger("redistmc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(f"usage: {message}")


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_ingest(args):
    graph = io.load_unit_graph(args.units, strict_adjacency=args.strict_adjacency)
    if args.out:
        _write(args.out, io.dumps(io.unit_graph_doc(graph)) + "\n")
    _emit({"units": graph.n_vertices, "edges": graph.n_edges,
           "population": graph.total_pop, "dem": int(graph.dem.sum()),
           "rep": int(graph.rep.sum())})


def cmd_seed(args):
    graph = io.load_unit_graph(args.graph, strict_adjacency=args.strict_adjacency)
    plan = seed_plan(graph, args.districts, args.tol, np.random.default_rng(args.seed or 0))
    _write(args.out, io.dumps(io.plan_doc(graph, plan, label="seed")) + "\n")
    _emit({"n_districts": plan.n_districts, "district_pops": plan.district_pops.tolist(),
           "cut_edges": plan.cut_edge_count})


def _load_config(args):
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.chains is not None:
        cfg.n_chains = args.chains
    if getattr(args, "graph", None):
        cfg.graph = args.graph
    if getattr(args, "init", None):
        cfg.init = args.init
    if args.out:
        cfg.out = args.out
    if not cfg.graph:
        raise ParseError("no unit graph given (config 'graph' or --graph)")
    return cfg


def _initial_plan(graph, cfg):
    if cfg.init:
        return io.load_plan(graph, cfg.init)
    tol = cfg.params.pop_tolerance if cfg.kind != "anneal" else cfg.schedule.pop_tol_target
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0].generate_state(1))
    return seed_plan(graph, cfg.params.n_districts, tol, rng)


def cmd_run(args):
    cfg = _load_config(args)
    graph = io.load_unit_graph(cfg.graph, strict_adjacency=args.strict_adjacency)
    init = _initial_plan(graph, cfg)
    ensemble, traces = run_ensemble(graph, init, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_plan(graph, init, out / "initial_plan.json", label="initial")
    io.save_ensemble(graph, ensemble, out / "ensemble.jsonl")
    _write(out / "traces.jsonl", "".join(line + "\n" for line in trace_lines(traces)))
    props = sum(len(t) for t in traces)
    acc = sum(t.n_accepted for t in traces)
    report = {"n_plans": len(ensemble), "proposals": props, "accepted": acc,
              "acceptance_rate": acc / props if props else 0.0,
              "seats": analysis.outcome_distribution(ensemble).counts
              if len(ensemble) >= 2 else {}}
    _write(out / "run_report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(report)


def _read_traces(paths):
    traces = []
    for p in paths:
        for line in Path(p).read_text(encoding="utf-8").splitlines():
            if line.strip():
                rec = json.loads(line)
                reasons = np.asarray(rec.get("reasons", []))
                acc = reasons == 0 if len(reasons) else None
                traces.append(ChainTrace(rec["values"], acc, rec.get("statistic",
                                                                      "cut_edge_count")))
    return traces


def cmd_diagnose(args):
    if args.grid:
        cfg = _load_config(args)
        graph = io.load_unit_graph(cfg.graph, strict_adjacency=args.strict_adjacency)
        init = _initial_plan(graph, cfg)
        grid = [int(x) for x in args.grid.split(",")]
        kind = "flip" if cfg.kind == "anneal" else cfg.kind
        n_chains = args.n_chains or 10
        try:
            steps, profile = min_steps_search(
                graph, init, cfg.params, n_chains, args.threshold, grid,
                np.random.default_rng(cfg.seed), kind=kind, discard_fraction=args.discard,
                swap_rate=cfg.swap_rate, return_profile=True)
        except NotConverged as exc:
            report = {"converged": False, "threshold": args.threshold,
                      "rhat": {str(k): v for k, v in exc.profile.items()}}
            if args.report:
                _write(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
            raise
        report = {"converged": True, "threshold": args.threshold, "min_steps": steps,
                  "n_chains": n_chains, "rhat": {str(k): v for k, v in profile.items()}}
    else:
        if not args.traces:
            raise ParseError("give trace files or --grid with --config")
        traces = _read_traces(args.traces)
        r = gelman_rubin(traces, args.discard)
        report = {"rhat": r, "threshold": args.threshold, "converged": r < args.threshold,
                  "n_chains": len(traces), "discard_fraction": args.discard}
    if args.report:
        _write(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(report)
    if not report["converged"]:
        raise NotConverged(f"R-hat {report.get('rhat')} >= {args.threshold}")


def cmd_analyze(args):
    graph = io.load_unit_graph(args.graph, strict_adjacency=args.strict_adjacency)
    ens = io.load_ensemble(graph, args.ensemble, check_fraction=args.check_fraction)
    dist = analysis.outcome_distribution(ens)
    enacted = None
    report = {"n_plans": dist.n_plans, "counts": dist.counts, "mean": dist.mean,
              "stddev": dist.stddev, "tied_districts": int(ens.ties.sum())}
    if args.enacted:
        enacted_plan = io.load_plan(graph, args.enacted)
        enacted = analysis.seats_won(graph, enacted_plan)
        report["enacted_seats"] = enacted
    if dist.stddev > 0:
        report["probabilities"] = {str(k): v for k, v in
                                   analysis.probability_table(dist, width=4).items()}
        if enacted is not None:
            report["enacted"] = analysis.enacted_comparison(dist, enacted)
    else:
        report["probabilities"] = None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "histogram.csv", analysis.emit_histogram(dist, enacted))
    if args.svg:
        _write(out / "histogram.svg", analysis.histogram_svg(dist, enacted))
    _write(out / "analysis.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(report)


def build_parser():
    p = _Parser(prog="redistmc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--strict-adjacency", action="store_true",
                        help="fail on one-sided adjacency instead of symmetrizing")

    sp = sub.add_parser("ingest", help="validate a unit file, derive adjacency, normalize")
    sp.add_argument("units")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("seed", help="build an initial plan by region growing")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--districts", type=int, required=True)
    sp.add_argument("--tol", type=float, default=0.1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_seed)

    for name, func in (("run", cmd_run), ("diagnose", cmd_diagnose)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=(name == "run"))
        sp.add_argument("--graph")
        sp.add_argument("--init", help="initial plan file (default: seeded plan)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--chains", type=int, help="worker processes")
        sp.add_argument("--out")
        common(sp)
        sp.set_defaults(func=func)
    sp.add_argument("traces", nargs="*", help="trace JSON-lines files from `run`")
    sp.add_argument("--discard", type=float, default=0.5)
    sp.add_argument("--threshold", type=float, default=1.1)
    sp.add_argument("--grid", help="comma-separated accepted-step counts to search")
    sp.add_argument("--n-chains", type=int, help="independent chains per grid point")
    sp.add_argument("--report", help="write the diagnostics report here")

    sp = sub.add_parser("analyze", help="seat distribution, probabilities, enacted comparison")
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--enacted")
    sp.add_argument("--out", default=".")
    sp.add_argument("--svg", action="store_true")
    sp.add_argument("--check-fraction", type=float, default=0.05)
    common(sp)
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except RedistError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "exit_code": exc.exit_code}
        if isinstance(exc, NotConverged) and exc.profile:
            payload["rhat"] = {str(k): v for k, v in exc.profile.items()}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
