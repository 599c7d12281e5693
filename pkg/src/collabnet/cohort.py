"""Insider/outsider debut analysis.

A debutant is an insider when the relation data flags a blood relative and
that relative is already a node of the pre-cohort graph. Each debutant's
earliest cohort-window film supplies billing position, rating and co-cast;
insiders also get their relative's PageRank and influence on top
directors.
"""
from __future__ import annotations

import csv
import logging
import math
import statistics
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.stats import rankdata

from .centrality import ScoreTable
from .graph import CollabGraph
from .influence import InfluenceParams, influence_to_top_directors
from .ingest import FilmRecord, RelationRecord

logger = logging.getLogger(__name__)

CORRELATED_FEATURES = ("related_importance", "related_influence", "related_mean_hops", "cocast_prominence")


@dataclass(frozen=True)
class CohortLabel:
    debutant: str
    is_insider: bool
    related_star: int | None = None
    claimed_relative: str = ""


def label_cohort(relations: Sequence[RelationRecord], g: CollabGraph) -> dict[str, CohortLabel]:
    labels: dict[str, CohortLabel] = {}
    for rel in relations:
        if rel.star_name in labels:
            continue
        node = g.find(rel.related_star_name) if rel.is_related else None
        if rel.is_related and node is None:
            logger.warning("%s: related star %r not in graph, labelled outsider", rel.star_name, rel.related_star_name)
        labels[rel.star_name] = CohortLabel(rel.star_name, node is not None, node, rel.related_star_name)
    return labels


@dataclass(frozen=True)
class DebutFeature:
    debutant: str
    is_insider: bool
    debut_film: FilmRecord
    role_number: int
    related_star: int | None = None
    cocast_prominence: float | None = None
    related_importance: float | None = None
    related_influence: float | None = None
    related_mean_hops: float | None = None
    related_hops: tuple[int, ...] = ()

    @property
    def debut_rating(self) -> float | None:
        return self.debut_film.imdb_rating


def debut_films(names, films: Sequence[FilmRecord]) -> dict[str, FilmRecord]:
    """Earliest film billing each name as an actor; same-year ties keep file order."""
    wanted = set(names)
    chosen: dict[str, FilmRecord] = {}
    for film in sorted(films, key=lambda f: f.year):  # stable
        for actor in film.actors:
            if actor in wanted and actor not in chosen:
                chosen[actor] = film
    return chosen


def _aggregate(values: list[float], how: str) -> float | None:
    if not values:
        return None
    if how == "mean":
        return math.fsum(values) / len(values)
    if how == "max":
        return max(values)
    if how == "sum":
        return math.fsum(values)
    raise ValueError(f"unknown co-cast aggregation {how!r}")


def extract_features(
    labels: dict[str, CohortLabel],
    films: Sequence[FilmRecord],
    g: CollabGraph,
    params: InfluenceParams,
    k: int = 100,
    cocast_agg: str = "mean",
) -> list[DebutFeature]:
    pagerank: ScoreTable = params.pagerank
    debuts = debut_films(labels, films)
    features = []
    for name, label in labels.items():
        film = debuts.get(name)
        if film is None:
            logger.warning("%s: no cohort-window film, skipped", name)
            continue
        known = [g.find(a) for a in film.actors if a != name]
        cocast = _aggregate([pagerank[v] for v in known if v is not None], cocast_agg)
        extra = {}
        if label.is_insider:
            star = label.related_star
            summary = influence_to_top_directors(g, star, k, params)
            extra = dict(
                related_star=star,
                related_importance=pagerank[star],
                related_influence=summary.mean_value,
                related_mean_hops=summary.mean_hops,
                related_hops=tuple(r.hops for r in summary.results if r.reachable),
            )
        features.append(DebutFeature(
            debutant=name,
            is_insider=label.is_insider,
            debut_film=film,
            role_number=film.actors.index(name),
            cocast_prominence=cocast,
            **extra,
        ))
    return features


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise ValueError("pearson needs equal-length inputs")
    if len(x) < 2:
        raise ValueError("pearson needs at least two observations")
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("pearson is undefined for a constant input")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    return pearson(list(rankdata(x)), list(rankdata(y)))


CORRELATIONS = {"pearson": pearson, "spearman": spearman}


def correlation_matrix(columns: dict[str, list], method: str = "pearson") -> list[list[float | None]]:
    """Pairwise-deleted correlations; None where fewer than two complete
    pairs remain or a column is constant."""
    corr = CORRELATIONS[method]
    keys = list(columns)
    m: list[list[float | None]] = [[None] * len(keys) for _ in keys]
    for i, a in enumerate(keys):
        for j in range(i, len(keys)):
            b = keys[j]
            pairs = [(p, q) for p, q in zip(columns[a], columns[b]) if p is not None and q is not None]
            try:
                r = corr([p for p, _ in pairs], [q for _, q in pairs])
            except ValueError:
                r = None
            if i == j and r is not None:
                r = 1.0
            m[i][j] = m[j][i] = r
    return m


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if len(vals) >= 2 else None


def _median(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(statistics.median(vals)) if len(vals) >= 2 else None


def _delta(a, b):
    return None if a is None or b is None else a - b


@dataclass
class CohortReport:
    features: list[DebutFeature]
    insider_count: int
    outsider_count: int
    stats: dict = field(default_factory=dict)
    correlation_labels: tuple[str, ...] = CORRELATED_FEATURES
    correlation: list = field(default_factory=list)
    method: str = "pearson"


def cohort_statistics(features: Sequence[DebutFeature], method: str = "pearson") -> CohortReport:
    """Cohort means, deltas (insider minus outsider) and the insider
    feature correlation matrix. Any cell with < 2 samples is None."""
    ins = [f for f in features if f.is_insider]
    outs = [f for f in features if not f.is_insider]
    stats = {}
    for label, get in (("rating", lambda f: f.debut_rating), ("role_number", lambda f: f.role_number)):
        for agg_name, agg in (("mean", _mean), ("median", _median)):
            a = agg(get(f) for f in ins)
            b = agg(get(f) for f in outs)
            stats[f"{agg_name}_{label}_insider"] = a
            stats[f"{agg_name}_{label}_outsider"] = b
            stats[f"{agg_name}_{label}_delta"] = _delta(a, b)
    if len(ins) < 2 or len(outs) < 2:
        logger.warning("cohort has %d insiders and %d outsiders; deltas need two of each", len(ins), len(outs))
    columns = {name: [getattr(f, name) for f in ins] for name in CORRELATED_FEATURES}
    corr = correlation_matrix(columns, method)
    return CohortReport(list(features), len(ins), len(outs), stats, CORRELATED_FEATURES, corr, method)


def hop_histogram(features: Sequence[DebutFeature]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for f in features:
        for h in f.related_hops:
            hist[h] = hist.get(h, 0) + 1
    return dict(sorted(hist.items()))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


FEATURE_COLUMNS = (
    "debutant", "is_insider", "related_star", "debut_film", "debut_year", "role_number",
    "debut_rating", "cocast_prominence", "related_importance", "related_influence", "related_mean_hops",
)


def feature_row(g: CollabGraph, f: DebutFeature) -> dict:
    return {
        "debutant": f.debutant,
        "is_insider": f.is_insider,
        "related_star": g.name(f.related_star) if f.related_star is not None else None,
        "debut_film": f.debut_film.title,
        "debut_year": f.debut_film.year,
        "role_number": f.role_number,
        "debut_rating": f.debut_rating,
        "cocast_prominence": f.cocast_prominence,
        "related_importance": f.related_importance,
        "related_influence": f.related_influence,
        "related_mean_hops": f.related_mean_hops,
    }


def write_features(g: CollabGraph, report: CohortReport, stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(FEATURE_COLUMNS)
    for f in report.features:
        row = feature_row(g, f)
        out.writerow([_cell(row[c]) if c != "is_insider" else int(row[c]) for c in FEATURE_COLUMNS])


def write_correlation(report: CohortReport, stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["feature", *report.correlation_labels])
    for label, row in zip(report.correlation_labels, report.correlation):
        out.writerow([label, *(_cell(v) for v in row)])


def write_hop_histogram(hist: dict[int, int], stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["hops", "count"])
    for h, c in hist.items():
        out.writerow([h, c])


def report_json(g: CollabGraph, report: CohortReport) -> dict:
    return {
        "insider_count": report.insider_count,
        "outsider_count": report.outsider_count,
        "statistics": report.stats,
        "correlation": {
            "method": report.method,
            "labels": list(report.correlation_labels),
            "matrix": report.correlation,
        },
        "hop_histogram": {str(h): c for h, c in hop_histogram(report.features).items()},
        "features": [feature_row(g, f) for f in report.features],
    }


def as_array(report: CohortReport) -> np.ndarray:
    """Correlation matrix with NaN for undefined cells."""
    return np.array([[np.nan if v is None else v for v in row] for row in report.correlation], dtype=float)
