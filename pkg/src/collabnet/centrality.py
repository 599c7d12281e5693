"""Degree, closeness and role-weighted personalized PageRank."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy import sparse

from .graph import CollabGraph, hop_matrix
from .ingest import FilmRecord

DEFAULT_ALPHA = 0.8
DEFAULT_DAMPING = 0.85
DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITERATIONS = 200


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"PageRank did not converge in {iterations} iterations (L1 residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class ScoreTable:
    metric: str
    scores: np.ndarray
    names: tuple[str, ...]
    params: dict = field(default_factory=dict)
    iterations: int | None = None

    def __getitem__(self, node: int) -> float:
        return float(self.scores[node])

    def __len__(self) -> int:
        return len(self.scores)

    def score_of(self, name: str) -> float:
        return float(self.scores[self.names.index(name)])

    def params_text(self) -> str:
        return ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))


def degree_centrality(g: CollabGraph) -> ScoreTable:
    if g.n_edges == 0:
        raise ValueError("degree centrality needs at least one edge")
    deg = np.array([g.degree(v) for v in range(g.n_nodes)], dtype=float)
    return ScoreTable("degree", deg / deg.max(), g.names)


def closeness_centrality(g: CollabGraph, threads: int = 1) -> ScoreTable:
    """Closeness with the Wasserman-Faust component correction.

    ``score(v) = (r / (n - 1)) * (r / sum_d)`` where ``r`` counts the nodes
    reachable from ``v``. On a connected graph this is ``(n - 1) / sum_d``.
    """
    n = g.n_nodes
    if n < 2:
        raise ValueError("closeness centrality needs at least two nodes")
    hops = hop_matrix(g, threads=threads)
    finite = np.isfinite(hops)
    reach = finite.sum(axis=1) - 1
    total = np.where(finite, hops, 0.0).sum(axis=1)
    scores = np.zeros(n)
    ok = total > 0
    scores[ok] = (reach[ok] / (n - 1)) * (reach[ok] / total[ok])
    return ScoreTable("closeness", scores, g.names)


def personalization_weights(
    g: CollabGraph,
    films: Sequence[FilmRecord],
    alpha: float = DEFAULT_ALPHA,
    include_directors: bool = True,
) -> np.ndarray:
    """Unnormalized billing-weighted popularity per node.

    A person billed at index ``i`` in film ``j`` earns ``votes_norm(j) *
    alpha**i`` (lead is index 0; directors count as index 0). Their weight
    is the mean over the films that credit them. People without credits in
    ``films`` get 0.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    earned: dict[int, list[float]] = defaultdict(list)
    for film in films:
        credit: dict[str, int] = {}
        for i, actor in enumerate(film.actors):
            credit.setdefault(actor, i)
        if include_directors:
            for d in film.directors:
                credit[d] = 0
        for person, i in credit.items():
            node = g.find(person)
            if node is not None:
                earned[node].append(film.votes_norm * alpha**i)
    raw = np.zeros(g.n_nodes)
    for node, parts in earned.items():
        raw[node] = math.fsum(parts) / len(parts)
    return raw


def build_personalization(
    g: CollabGraph,
    films: Sequence[FilmRecord],
    alpha: float = DEFAULT_ALPHA,
    include_directors: bool = True,
) -> np.ndarray:
    """PageRank restart distribution: :func:`personalization_weights` scaled to sum 1."""
    raw = personalization_weights(g, films, alpha, include_directors)
    total = math.fsum(raw)
    if total <= 0.0:
        raise ValueError("personalization is all zero (no film carries votes)")
    return raw / total


def transition_matrix(g: CollabGraph) -> sparse.csr_matrix:
    """Column-stochastic walk matrix; column ``v`` spreads by edge weight."""
    adj = g.to_sparse(weighted=True)
    strength = np.asarray(adj.sum(axis=0)).ravel()
    inv = np.divide(1.0, strength, out=np.zeros_like(strength), where=strength > 0)
    return (adj @ sparse.diags(inv)).tocsr()


def personalized_pagerank(
    g: CollabGraph,
    personalization: np.ndarray | None = None,
    damping: float = DEFAULT_DAMPING,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    params: dict | None = None,
) -> ScoreTable:
    """Power iteration for ``x = damping * W x + (1 - damping) * p``.

    Mass sitting on nodes without edges is sent back through ``p``. Stops
    once the L1 change drops below ``tolerance``; raises
    :class:`ConvergenceError` otherwise.
    """
    n = g.n_nodes
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    if n == 0:
        raise ValueError("PageRank of an empty graph")
    p = np.full(n, 1.0 / n) if personalization is None else np.asarray(personalization, dtype=float)
    if p.shape != (n,) or (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("personalization must be a non-negative vector over all nodes summing to 1")
    W = transition_matrix(g)
    dangling = np.asarray(W.sum(axis=0)).ravel() == 0
    x = p.copy()
    residual = math.inf
    for it in range(1, max_iterations + 1):
        new = damping * (W @ x) + (damping * x[dangling].sum() + 1.0 - damping) * p
        residual = float(np.abs(new - x).sum())
        x = new
        if residual < tolerance:
            break
    else:
        raise ConvergenceError(max_iterations, residual)
    x = x / x.sum()
    table_params = {"damping": damping, "tolerance": tolerance, "max_iterations": max_iterations}
    table_params.update(params or {})
    return ScoreTable("pagerank", x, g.names, table_params, iterations=it)


def top_k(table: ScoreTable, k: int, among: Sequence[int] | None = None) -> list[tuple[int, float]]:
    """Highest scores first; equal scores by ascending node id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    nodes = range(len(table)) if among is None else among
    ranked = sorted(nodes, key=lambda v: (-table.scores[v], v))
    return [(v, float(table.scores[v])) for v in ranked[:k]]


def write_scores(table: ScoreTable, stream: IO[str], k: int | None = None) -> None:
    rows = top_k(table, k or len(table)) if len(table) else []
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["rank", "name", "score", "metric", "params"])
    params = table.params_text()
    for rank, (v, s) in enumerate(rows, start=1):
        out.writerow([rank, table.names[v], repr(s), table.metric, params])
