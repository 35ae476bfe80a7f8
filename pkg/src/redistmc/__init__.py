"""Markov chain ensembles of districting plans with simulated annealing."""
from .analysis import (Ensemble, OutcomeDistribution, enacted_comparison, emit_histogram,
                       outcome_distribution, outcome_probability, seats_won)
from .annealing import AnnealSchedule, SchedulePoint, params_at, run_annealed_sample, total_steps
from .chain import ChainState, RejectReason, StepRecord, Trace, run_chain
from .diagnostics import ChainTrace, acceptance_summary, gelman_rubin, min_steps_search
from .graph import (Districting, DualGraph, cut_edges, district_components, district_population,
                    flip_vertex, grid_graph, is_valid)
from .metrics import (ChainParams, acceptance_probability, compactness, pop_equality, weight,
                      within_pop_tolerance)
from .seeding import seed_plan

__version__ = "0.1.0"
