"""Effective influence of a person on another along their shortest path.

For the canonical shortest path ``a = u0, u1, ..., uh = d``::

    value = PR(a) + sum_{k=1..h} PR(u_k) * w(u_{k-1}, u_k) * alpha**k

``w`` is the raw aggregated edge weight and ``alpha`` the per-hop
attenuation.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO, NamedTuple, Sequence

from .centrality import DEFAULT_ALPHA, ScoreTable, top_k
from .graph import CollabGraph, PathResult, ShortestPathTree, all_shortest_paths


@dataclass(frozen=True)
class InfluenceParams:
    pagerank: ScoreTable
    alpha: float = DEFAULT_ALPHA
    include_target: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"influence alpha must lie in (0, 1), got {self.alpha}")
        if self.pagerank.metric != "pagerank":
            raise ValueError(f"expected a pagerank table, got {self.pagerank.metric}")


class InfluenceTerm(NamedTuple):
    node: int
    pagerank: float
    weight: float
    exponent: int
    value: float


@dataclass(frozen=True)
class InfluenceResult:
    source: int
    target: int
    value: float
    path: PathResult
    terms: tuple[InfluenceTerm, ...]

    @property
    def reachable(self) -> bool:
        return self.path.reachable

    @property
    def hops(self) -> int | None:
        return self.path.hops


def _combine(base: float, terms: Sequence[InfluenceTerm]) -> float:
    # left-to-right along the path; recomputing from terms gives the same float
    total = base
    for t in terms:
        total += t.value
    return total


def influence_along(g: CollabGraph, path: PathResult, params: InfluenceParams) -> InfluenceResult:
    pr = params.pagerank
    base = pr[path.source]
    nodes = path.nodes
    stop = len(nodes) if params.include_target else len(nodes) - 1
    terms = []
    for k in range(1, stop):
        u, prev = nodes[k], nodes[k - 1]
        w = g.weight(prev, u)
        terms.append(InfluenceTerm(u, pr[u], w, k, pr[u] * w * params.alpha**k))
    return InfluenceResult(path.source, path.target, _combine(base, terms), path, tuple(terms))


def effective_influence(
    g: CollabGraph,
    a: int,
    d: int,
    params: InfluenceParams,
    tree: ShortestPathTree | None = None,
) -> InfluenceResult:
    """Influence of ``a`` on ``d``; pass ``tree`` (rooted at ``a``) to reuse BFS work."""
    if tree is None or tree.source != a:
        tree = ShortestPathTree(g, a)
    return influence_along(g, tree.path_to(d), params)


def max_effective_influence(g: CollabGraph, a: int, d: int, params: InfluenceParams, limit: int = 10_000) -> InfluenceResult:
    """Largest influence over every shortest path from ``a`` to ``d``.

    Enumerates paths, so it is meant for small graphs and sensitivity checks.
    """
    paths = all_shortest_paths(g, a, d, limit=limit)
    if not paths:
        return influence_along(g, PathResult(a, d, None, ()), params)
    results = [influence_along(g, PathResult(a, d, len(p) - 1, p), params) for p in paths]
    return max(results, key=lambda r: r.value)


def top_directors(pagerank: ScoreTable, g: CollabGraph, k: int, exclude: int | None = None) -> list[int]:
    directors = [v for v in g.nodes_with_role("director") if v != exclude]
    if not directors:
        return []
    return [v for v, _ in top_k(pagerank, k, among=directors)]


@dataclass(frozen=True)
class DirectorInfluence:
    source: int
    results: tuple[InfluenceResult, ...]
    mean_value: float | None
    mean_hops: float | None

    @property
    def reachable_count(self) -> int:
        return sum(1 for r in self.results if r.reachable)

    @property
    def any_reachable(self) -> bool:
        return self.reachable_count > 0


def influence_to_top_directors(g: CollabGraph, a: int, k: int, params: InfluenceParams) -> DirectorInfluence:
    """Influence of ``a`` on each of the ``k`` highest-PageRank directors.

    ``a`` itself is never one of the targets. Means cover reachable targets
    only and are None when no target is reachable.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    tree = ShortestPathTree(g, a)
    results = tuple(effective_influence(g, a, d, params, tree) for d in top_directors(params.pagerank, g, k, exclude=a))
    reached = [r for r in results if r.reachable]
    if not reached:
        return DirectorInfluence(a, results, None, None)
    mean_value = math.fsum(r.value for r in reached) / len(reached)
    mean_hops = sum(r.hops for r in reached) / len(reached)
    return DirectorInfluence(a, results, mean_value, mean_hops)


def write_influence(g: CollabGraph, results: Sequence[InfluenceResult], stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["source", "target", "hops", "value"])
    for r in results:
        out.writerow([g.name(r.source), g.name(r.target), "" if r.hops is None else r.hops, repr(r.value)])


def breakdown_json(g: CollabGraph, r: InfluenceResult) -> dict:
    return {
        "source": g.name(r.source),
        "target": g.name(r.target),
        "reachable": r.reachable,
        "hops": r.hops,
        "path": [g.name(v) for v in r.path.nodes],
        "value": r.value,
        "terms": [
            {"node": g.name(t.node), "pagerank": t.pagerank, "weight": t.weight, "exponent": t.exponent, "value": t.value}
            for t in r.terms
        ],
    }


def write_breakdown(g: CollabGraph, results: Sequence[InfluenceResult], stream: IO[str]) -> None:
    json.dump([breakdown_json(g, r) for r in results], stream, indent=2, ensure_ascii=False)
    stream.write("\n")
