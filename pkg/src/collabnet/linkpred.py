"""Common-neighbour similarity between two people in the graph."""
from __future__ import annotations

import csv
import math
from typing import IO, Iterable

from .graph import CollabGraph


def _nbrs(g: CollabGraph, v: int) -> set[int]:
    return set(g.neighbors(v)) - {v}


def jaccard(g: CollabGraph, u: int, v: int) -> float:
    a, b = _nbrs(g, u), _nbrs(g, v)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def adamic_adar_detail(g: CollabGraph, u: int, v: int) -> tuple[float, int]:
    """(score, skipped) where skipped counts common neighbours of degree <= 1."""
    terms = []
    skipped = 0
    for x in sorted(_nbrs(g, u) & _nbrs(g, v)):
        k = g.degree(x)
        if k <= 1:
            skipped += 1
            continue
        terms.append(1.0 / math.log(k))
    return math.fsum(terms), skipped


def adamic_adar(g: CollabGraph, u: int, v: int) -> float:
    return adamic_adar_detail(g, u, v)[0]


def write_pair_scores(g: CollabGraph, pairs: Iterable[tuple[int, int]], stream: IO[str]) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(["name_u", "name_v", "jaccard", "adamic_adar"])
    for u, v in pairs:
        out.writerow([g.name(u), g.name(v), repr(jaccard(g, u, v)), repr(adamic_adar(g, u, v))])
