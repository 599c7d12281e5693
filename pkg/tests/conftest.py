import sys
from pathlib import Path

import pytest

from collabnet.graph import build_graph
from collabnet.ingest import FilmRecord

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"
SYNTHETIC = FIXTURES / "synthetic"
GOLDEN = FIXTURES / "golden"


def film(title, actors, directors=(), votes_norm=1.0, year=2000, rating=None, votes=None):
    return FilmRecord(title, year, tuple(actors), tuple(directors), rating, votes, votes_norm)


def graph_from_edges(edges, n=None):
    """One two-person film per edge, so weights come out exactly as given.

    Nodes are named ``n0, n1, ...``; with fewer than 11 nodes sorted-name
    order equals numeric order, so ids match the integers used here.
    """
    n = n if n is not None else 1 + max(max(e[:2]) for e in edges)
    assert n <= 10
    films = [film(f"e{u}-{v}", [f"n{u}", f"n{v}"], votes_norm=w) for u, v, w in edges]
    # isolated nodes: a solo film with no partner adds the node, no edge
    linked = {x for u, v, _ in edges for x in (u, v)}
    films += [film(f"solo{v}", [f"n{v}"], votes_norm=1.0) for v in range(n) if v not in linked]
    return build_graph(films)


@pytest.fixture
def star():
    # hub n0 with leaves n1..n3
    return graph_from_edges([(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])


@pytest.fixture
def triangle():
    return graph_from_edges([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def five_node():
    # n0 reaches n4 in two hops via n1 (product 0.06) or n2 (product 0.72)
    return graph_from_edges([
        (0, 1, 0.2), (1, 4, 0.3), (0, 2, 0.9), (2, 4, 0.8), (2, 3, 0.5), (3, 4, 0.5),
    ])


# acceptance criteria record one line each here; printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
