"""Undirected weighted collaboration graph over actors and directors.

Node ids are dense integers assigned in sorted-name order, so the same
credits always produce the same ids regardless of film order. Edge weight
is the sum of ``votes_norm`` over every film the two people share.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .ingest import FilmRecord, normalize_name

UNREACHABLE = -1


class CollabGraph:
    """Immutable adjacency-list graph. Build it with :func:`build_graph`."""

    def __init__(self, names, roles, adjacency, edge_films):
        self._names: tuple[str, ...] = tuple(names)
        self._index = {name: i for i, name in enumerate(self._names)}
        self._roles: tuple[frozenset, ...] = tuple(frozenset(r) for r in roles)
        # neighbor lists sorted by id, so every traversal order is fixed
        self._adj: tuple[dict[int, float], ...] = tuple(
            dict(sorted(nbrs.items())) for nbrs in adjacency
        )
        self._edge_films = {k: tuple(v) for k, v in edge_films.items()}

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return normalize_name(name) in self._index

    @property
    def n_nodes(self) -> int:
        return len(self._names)

    @property
    def n_edges(self) -> int:
        return len(self._edge_films)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def node_id(self, name: str) -> int:
        try:
            return self._index[normalize_name(name)]
        except KeyError:
            raise KeyError(f"{name!r} is not in the graph") from None

    def find(self, name: str) -> int | None:
        return self._index.get(normalize_name(name))

    def name(self, node: int) -> str:
        return self._names[node]

    def roles(self, node: int) -> frozenset:
        return self._roles[node]

    def neighbors(self, node: int) -> dict[int, float]:
        return self._adj[node]

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def weight(self, u: int, v: int) -> float:
        return self._adj[u].get(v, 0.0)

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Each undirected edge once, as (u, v, weight) with u < v."""
        for u, nbrs in enumerate(self._adj):
            for v, w in nbrs.items():
                if u < v:
                    yield u, v, w

    def edge_films(self, u: int, v: int) -> tuple[str, ...]:
        return self._edge_films.get((min(u, v), max(u, v)), ())

    def nodes_with_role(self, role: str) -> list[int]:
        return [i for i, r in enumerate(self._roles) if role in r]

    def to_sparse(self, weighted: bool = True) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for u, nbrs in enumerate(self._adj):
            for v, w in nbrs.items():
                rows.append(u)
                cols.append(v)
                vals.append(w if weighted else 1.0)
        n = self.n_nodes
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CollabGraph):
            return NotImplemented
        return (
            self._names == other._names
            and self._roles == other._roles
            and self._adj == other._adj
            and self._edge_films == other._edge_films
        )

    def __repr__(self) -> str:
        return f"CollabGraph(nodes={self.n_nodes}, edges={self.n_edges})"


def build_graph(films: Sequence[FilmRecord]) -> CollabGraph:
    """Clique per film over its (capped) actors and directors.

    Films need ``votes_norm`` set. Weights from several shared films are
    added with :func:`math.fsum`, which makes the result independent of
    film order.
    """
    roles: dict[str, set] = defaultdict(set)
    contributions: dict[tuple[str, str], list[float]] = defaultdict(list)
    film_ids: dict[tuple[str, str], list[str]] = defaultdict(list)
    for film in films:
        if film.votes_norm is None:
            raise ValueError(f"{film.film_id}: votes_norm missing, preprocess first")
        for a in film.actors:
            roles[a].add("actor")
        for d in film.directors:
            roles[d].add("director")
        people = sorted(film.principals)
        for i, a in enumerate(people):
            for b in people[i + 1:]:
                contributions[a, b].append(film.votes_norm)
                film_ids[a, b].append(film.film_id)

    names = sorted(roles)
    index = {n: i for i, n in enumerate(names)}
    adjacency: list[dict[int, float]] = [{} for _ in names]
    edge_films = {}
    for (a, b), parts in contributions.items():
        w = math.fsum(sorted(parts))
        if w <= 0.0:
            # only zero-vote films link this pair
            continue
        u, v = index[a], index[b]
        adjacency[u][v] = w
        adjacency[v][u] = w
        edge_films[min(u, v), max(u, v)] = sorted(film_ids[a, b])
    return CollabGraph(names, [roles[n] for n in names], adjacency, edge_films)


@dataclass(frozen=True)
class PathResult:
    source: int
    target: int
    hops: int | None
    nodes: tuple[int, ...]

    @property
    def reachable(self) -> bool:
        return self.hops is not None


def bfs_hops(g: CollabGraph, source: int) -> list[int]:
    """Hop distance from ``source`` to every node, ``UNREACHABLE`` if none."""
    dist = [UNREACHABLE] * g.n_nodes
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


class ShortestPathTree:
    """Canonical shortest paths from one source to every reachable node.

    Among minimum-hop paths the one with the largest product of edge weights
    wins; remaining ties go to the lexicographically smallest node sequence.
    Products are compared exactly (as fractions), so ties are real ties.
    """

    def __init__(self, g: CollabGraph, source: int):
        self.source = source
        self.hops = bfs_hops(g, source)
        n = g.n_nodes
        best: list[Fraction | None] = [None] * n
        seq: list[tuple[int, ...] | None] = [None] * n
        best[source] = Fraction(1)
        seq[source] = (source,)
        layer = [source]
        while layer:
            nxt: dict[int, None] = {}
            for u in layer:
                for v in g.neighbors(u):
                    if self.hops[v] == self.hops[u] + 1:
                        nxt[v] = None
            for v in nxt:
                top_prod, top_seq = None, None
                for p, w in g.neighbors(v).items():
                    if self.hops[p] != self.hops[v] - 1:
                        continue
                    prod = best[p] * Fraction(w)
                    if top_prod is None or prod > top_prod or (prod == top_prod and seq[p] < top_seq):
                        top_prod, top_seq = prod, seq[p]
                best[v] = top_prod
                seq[v] = top_seq + (v,)
            layer = list(nxt)
        self._product = best
        self._seq = seq

    def path_to(self, target: int) -> PathResult:
        nodes = self._seq[target]
        if nodes is None:
            return PathResult(self.source, target, None, ())
        return PathResult(self.source, target, len(nodes) - 1, nodes)

    def product_to(self, target: int) -> Fraction | None:
        return self._product[target]


def shortest_path(g: CollabGraph, source: int, target: int) -> PathResult:
    return ShortestPathTree(g, source).path_to(target)


def all_shortest_paths(g: CollabGraph, source: int, target: int, limit: int = 10_000) -> list[tuple[int, ...]]:
    """Every minimum-hop path, in lexicographic order. Small graphs only."""
    to_target = bfs_hops(g, target)
    if to_target[source] == UNREACHABLE:
        return []
    found: list[tuple[int, ...]] = []

    def walk(path):
        u = path[-1]
        if u == target:
            found.append(tuple(path))
            if len(found) > limit:
                raise RuntimeError(f"more than {limit} shortest paths")
            return
        for v in g.neighbors(u):
            if to_target[v] == to_target[u] - 1:
                path.append(v)
                walk(path)
                path.pop()

    walk([source])
    return found


def connected_components(g: CollabGraph) -> list[list[int]]:
    """Components as sorted id lists, largest first, ties by smallest id."""
    seen = [False] * g.n_nodes
    comps = []
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        comp = [v for v, d in enumerate(bfs_hops(g, s)) if d != UNREACHABLE]
        for v in comp:
            seen[v] = True
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def hop_matrix(g: CollabGraph, sources: Sequence[int] | None = None, threads: int = 1) -> np.ndarray:
    """Hop distances from ``sources`` (default: all nodes); inf when unreachable."""
    adj = g.to_sparse(weighted=False)
    idx = np.arange(g.n_nodes) if sources is None else np.asarray(sources, dtype=int)
    if len(idx) == 0 or g.n_nodes == 0:
        return np.zeros((len(idx), g.n_nodes))

    def run(chunk):
        return csgraph.shortest_path(adj, method="D", directed=False, unweighted=True, indices=chunk)

    if threads <= 1 or len(idx) < 2 * threads:
        return run(idx)
    chunks = np.array_split(idx, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.vstack(list(pool.map(run, chunks)))


def local_clustering(g: CollabGraph, node: int) -> float:
    nbrs = list(g.neighbors(node))
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = 0
    for i, u in enumerate(nbrs):
        adj_u = g.neighbors(u)
        links += sum(1 for v in nbrs[i + 1:] if v in adj_u)
    return 2.0 * links / (k * (k - 1))


def clustering_coefficient(g: CollabGraph) -> float:
    """Mean local clustering over all nodes; degree < 2 counts as 0."""
    if g.n_nodes == 0:
        raise ValueError("clustering coefficient of an empty graph")
    return math.fsum(local_clustering(g, v) for v in range(g.n_nodes)) / g.n_nodes


@dataclass(frozen=True)
class PathLengthSummary:
    mean: float
    pairs: int
    component_size: int
    n_components: int


def average_path_length(g: CollabGraph, threads: int = 1) -> PathLengthSummary:
    """Mean hop distance over unordered pairs of the largest component."""
    if g.n_edges == 0:
        raise ValueError("average path length is undefined without edges")
    comps = connected_components(g)
    giant = comps[0]
    hops = hop_matrix(g, giant, threads=threads)[:, giant]
    total = int(hops.sum()) // 2  # integer hops, symmetric matrix
    pairs = len(giant) * (len(giant) - 1) // 2
    return PathLengthSummary(total / pairs, pairs, len(giant), len(comps))


@dataclass(frozen=True)
class DegreeDistribution:
    histogram: dict[int, int]
    loglog_slope: float | None
    loglog_intercept: float | None


def degree_distribution(g: CollabGraph) -> DegreeDistribution:
    """Degree histogram and least-squares fit of log(count) on log(degree).

    Degree-0 nodes appear in the histogram but not in the fit. The fit needs
    at least two distinct positive degrees, otherwise slope is None.
    """
    hist: dict[int, int] = defaultdict(int)
    for v in range(g.n_nodes):
        hist[g.degree(v)] += 1
    hist = dict(sorted(hist.items()))
    pts = [(k, c) for k, c in hist.items() if k > 0]
    if len(pts) < 2:
        return DegreeDistribution(hist, None, None)
    x = np.log([k for k, _ in pts])
    y = np.log([c for _, c in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return DegreeDistribution(hist, float(slope), float(intercept))


def write_edge_list(g: CollabGraph, stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["node_a", "node_b", "weight", "films"])
    for u, v, w in g.edges():
        out.writerow([g.name(u), g.name(v), repr(w), "|".join(g.edge_films(u, v))])


def write_node_table(g: CollabGraph, stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["id", "name", "roles", "degree"])
    for v in range(g.n_nodes):
        out.writerow([v, g.name(v), "|".join(sorted(g.roles(v))), g.degree(v)])
