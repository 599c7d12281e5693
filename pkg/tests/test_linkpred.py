import io
import math

import pytest

from collabnet.linkpred import adamic_adar, adamic_adar_detail, jaccard, write_pair_scores
from conftest import graph_from_edges


def test_jaccard_identical_neighbourhoods():
    g = graph_from_edges([(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)])
    assert jaccard(g, 0, 1) == 1.0


def test_jaccard_disjoint():
    g = graph_from_edges([(0, 2, 1.0), (1, 3, 1.0)])
    assert jaccard(g, 0, 1) == 0.0


def test_jaccard_half_overlap():
    # u=0: {2,3,4}; v=1: {3,4,5}
    g = graph_from_edges([(0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0), (1, 3, 1.0), (1, 4, 1.0), (1, 5, 1.0)])
    assert jaccard(g, 0, 1) == 0.5


def test_jaccard_adjacent_pair_excludes_themselves():
    g = graph_from_edges([(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    # N(0) = {1, 2}, N(1) = {0, 2}
    assert jaccard(g, 0, 1) == pytest.approx(1 / 3)


def test_jaccard_isolated_pair():
    g = graph_from_edges([(0, 1, 1.0)], n=4)
    assert jaccard(g, 2, 3) == 0.0


def test_jaccard_self():
    g = graph_from_edges([(0, 1, 1.0), (0, 2, 1.0)])
    assert jaccard(g, 0, 0) == 1.0


def test_adamic_adar_no_common():
    g = graph_from_edges([(0, 2, 1.0), (1, 3, 1.0)])
    assert adamic_adar(g, 0, 1) == 0.0


def test_adamic_adar_one_common_of_degree_two():
    g = graph_from_edges([(0, 2, 1.0), (1, 2, 1.0)])
    assert adamic_adar(g, 0, 1) == pytest.approx(1.4426950408889634, abs=1e-15)


def test_adamic_adar_two_common():
    # n2 has degree 2, n3 has degree 4
    g = graph_from_edges([(0, 2, 1.0), (1, 2, 1.0), (0, 3, 1.0), (1, 3, 1.0), (3, 4, 1.0), (3, 5, 1.0)])
    assert adamic_adar(g, 0, 1) == pytest.approx(1 / math.log(2) + 1 / math.log(4), abs=1e-15)
    assert adamic_adar(g, 0, 1) == pytest.approx(2.164042561333445, abs=1e-12)


def test_adamic_adar_self_counts_degree_one_skip():
    # 0's only neighbour 1 has degree 1 when viewed as common neighbour of (0, 0)
    g = graph_from_edges([(0, 1, 1.0)])
    assert adamic_adar_detail(g, 0, 0) == (0.0, 1)


def test_adamic_adar_decreases_when_common_neighbour_grows():
    base = [(0, 2, 1.0), (1, 2, 1.0), (0, 3, 1.0), (1, 3, 1.0)]
    before = adamic_adar(graph_from_edges(base, n=6), 0, 1)
    after = adamic_adar(graph_from_edges(base + [(2, 5, 1.0)], n=6), 0, 1)
    assert after < before


def test_pair_export():
    g = graph_from_edges([(0, 2, 1.0), (1, 2, 1.0)])
    buf = io.StringIO()
    write_pair_scores(g, [(0, 1)], buf)
    assert buf.getvalue().splitlines() == ["name_u,name_v,jaccard,adamic_adar", f"n0,n1,1.0,{1 / math.log(2)!r}"]
