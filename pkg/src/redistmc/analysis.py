"""Election scoring over ensembles: seat tallies, outcome distributions,
normal-fit probabilities and enacted-plan comparison."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .errors import DegenerateSpread, InsufficientPlans
from .graph import Districting
from .metrics import compactness, pop_equality

_STD_NORMAL = NormalDist()


def district_votes(graph, plan):
    n = plan.n_districts
    dem = np.bincount(plan.assignment, weights=graph.dem, minlength=n)
    rep = np.bincount(plan.assignment, weights=graph.rep, minlength=n)
    return dem.astype(np.int64), rep.astype(np.int64)


def seats_won(graph, plan):
    """Districts where Democratic votes strictly exceed Republican votes."""
    dem, rep = district_votes(graph, plan)
    return int(np.count_nonzero(dem > rep))


def tied_districts(graph, plan):
    dem, rep = district_votes(graph, plan)
    return int(np.count_nonzero(dem == rep))


@dataclass
class Ensemble:
    assignments: np.ndarray  # (n_plans, n_vertices)
    n_districts: int
    pop_eq: np.ndarray
    comp: np.ndarray
    seats: np.ndarray
    ties: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.seats)

    @classmethod
    def from_plans(cls, graph, plans, provenance=None):
        plans = list(plans)
        n = plans[0].n_districts if plans else 0
        assignments = (np.stack([p.assignment for p in plans]) if plans
                       else np.zeros((0, graph.n_vertices), dtype=np.int64))
        return cls(
            assignments=assignments.astype(np.int64),
            n_districts=n,
            pop_eq=np.array([pop_equality(graph, p) for p in plans], dtype=np.float64),
            comp=np.array([compactness(graph, p) for p in plans], dtype=np.float64),
            seats=np.array([seats_won(graph, p) for p in plans], dtype=np.int64),
            ties=np.array([tied_districts(graph, p) for p in plans], dtype=np.int64),
            provenance=dict(provenance or {}),
        )

    def plan(self, graph, i):
        return Districting.from_assignment(graph, self.assignments[i], self.n_districts)


@dataclass(frozen=True)
class OutcomeDistribution:
    counts: dict
    mean: float
    stddev: float
    n_plans: int

    def require_spread(self):
        if not self.stddev > 0:
            raise DegenerateSpread("every plan produced the same outcome")


def outcome_distribution(ensemble_or_seats):
    seats = np.asarray(getattr(ensemble_or_seats, "seats", ensemble_or_seats), dtype=np.int64)
    if len(seats) < 2:
        raise InsufficientPlans("need at least two plans")
    counts = dict(sorted(Counter(int(s) for s in seats).items()))
    return OutcomeDistribution(counts, float(seats.mean()), float(seats.std(ddof=1)),
                               len(seats))


def outcome_probability(dist, k):
    """Mass of the fitted normal on [k - 0.5, k + 0.5]."""
    dist.require_spread()
    hi = (k + 0.5 - dist.mean) / dist.stddev
    lo = (k - 0.5 - dist.mean) / dist.stddev
    return _STD_NORMAL.cdf(hi) - _STD_NORMAL.cdf(lo)


def enacted_comparison(dist, enacted_seats):
    dist.require_spread()
    z = (enacted_seats - dist.mean) / dist.stddev
    return {"z_score": z, "probability": outcome_probability(dist, enacted_seats),
            "sigma_distance": abs(z)}


HISTOGRAM_HEADER = ("seats", "count", "fitted_density", "probability", "enacted")


def histogram_rows(dist, enacted=None):
    rows = []
    if dist is None or not dist.counts:
        return rows
    fitted = dist.stddev > 0
    for k, c in dist.counts.items():
        dens = NormalDist(dist.mean, dist.stddev).pdf(k) if fitted else ""
        prob = outcome_probability(dist, k) if fitted else ""
        rows.append((k, c, dens, prob, ""))
    if enacted is not None:
        prob = outcome_probability(dist, enacted) if fitted else ""
        dens = NormalDist(dist.mean, dist.stddev).pdf(enacted) if fitted else ""
        rows.append((enacted, dist.counts.get(enacted, 0), dens, prob, "enacted"))
    return rows


def emit_histogram(dist, enacted=None):
    """CSV text with one row per observed seat count and an enacted marker row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTOGRAM_HEADER)
    for row in histogram_rows(dist, enacted):
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x):
    return repr(float(x)) if isinstance(x, float) else x


def histogram_svg(dist, enacted=None, width=480, height=240):
    """Minimal bar chart with a red vertical line at the enacted outcome."""
    ks = list(dist.counts) + ([enacted] if enacted is not None else [])
    lo, hi = min(ks) - 1, max(ks) + 1
    top = max(dist.counts.values())
    pad = 30
    sx = (width - 2 * pad) / (hi - lo)
    sy = (height - 2 * pad) / top
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
             'stroke="black"/>']
    for k, c in dist.counts.items():
        x = pad + (k - lo - 0.4) * sx
        h = c * sy
        parts.append(f'<rect x="{x:.2f}" y="{height - pad - h:.2f}" width="{0.8 * sx:.2f}" '
                     f'height="{h:.2f}" fill="steelblue"/>')
        parts.append(f'<text x="{pad + (k - lo) * sx:.2f}" y="{height - pad + 14}" '
                     f'font-size="10" text-anchor="middle">{k}</text>')
    if enacted is not None:
        x = pad + (enacted - lo) * sx
        parts.append(f'<line x1="{x:.2f}" y1="{pad}" x2="{x:.2f}" y2="{height - pad}" '
                     'stroke="red" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def probability_table(dist, width=10):
    """Outcome probabilities for every integer within ``width`` sd of the mean."""
    dist.require_spread()
    lo = math.floor(dist.mean - width * dist.stddev)
    hi = math.ceil(dist.mean + width * dist.stddev)
    return {k: outcome_probability(dist, k) for k in range(lo, hi + 1)}
