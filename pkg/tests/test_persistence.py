from __future__ import annotations

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from chroma_mst.delaunay import triangulate
from chroma_mst.filtration import radius_values
from chroma_mst.persistence import (
    Diagram,
    UnionFind,
    emst,
    gabriel_graph,
    h0_diagram,
    h1_diagram,
    one_norm,
    write_diagrams_csv,
)

from oracles import brute_filtration, rank_persistence, spanning_tree_total, torus_metric


def _fm(P, topology="square"):
    return radius_values(triangulate(P, topology, allow_degenerate=topology == "square"))


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    assert uf.find(0) == uf.find(1) and uf.find(0) != uf.find(3)
    uf.union(1, 4)
    assert len({uf.find(i) for i in range(5)}) == 2


def test_emst_corners_and_collinear():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float) + 1e-9 * np.arange(8).reshape(4, 2)
    assert emst(_fm(sq)).total_length == pytest.approx(3.0)
    line = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    t = emst(_fm(line))
    assert t.total_length == pytest.approx(3.0)
    assert sorted(tuple(sorted(e)) for e in _fm(line).mosaic.edges[t.edges].tolist()) == [(0, 1), (1, 2)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 120), st.sampled_from(["square", "torus"]))
def test_emst_matches_complete_graph(seed, n, topology):
    if topology == "torus":
        n = max(n, 10)
    P = np.random.default_rng(seed).random((n, 2))
    length = emst(_fm(P, topology)).total_length
    if topology == "square":
        ref = minimum_spanning_tree(squareform(pdist(P))).sum()
    else:
        ref = spanning_tree_total(P, torus_metric)
    assert length == pytest.approx(ref, rel=1e-12)


def test_emst_scale():
    P = np.random.default_rng(0).random((5000, 2))
    assert 0.55 <= emst(_fm(P)).total_length / math.sqrt(5000) <= 0.75


def test_h0_small_cases():
    d = h0_diagram(_fm(np.array([[0.3, 0.3]])))
    assert len(d) == 0 and d.essential == 1
    d = h0_diagram(_fm(np.array([[0.0, 0.0], [0.6, 0.8]])))
    assert d.pairs.tolist() == [[0.0, 0.5]]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 300), st.sampled_from(["square", "torus"]))
def test_h0_norm_is_half_emst(seed, n, topology):
    if topology == "torus":
        n = max(n, 10)
    fm = _fm(np.random.default_rng(seed).random((n, 2)), topology)
    t = emst(fm)
    assert one_norm(h0_diagram(fm, t)) == pytest.approx(0.5 * t.total_length, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 300))
def test_h1_norm_identity_on_square(seed, n):
    fm = _fm(np.random.default_rng(seed).random((n, 2)))
    tree = set(emst(fm).edges.tolist())
    d1 = h1_diagram(fm)
    assert d1.essential == 0
    birth = [fm.edge_value[e] for e in gabriel_graph(fm) if e not in tree]
    expected = math.fsum(fm.tri_value[fm.tri_critical]) - math.fsum(birth)
    assert one_norm(d1) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(10, 300), st.sampled_from(["square", "torus"]))
def test_dual_and_reduction_agree(seed, n, topology):
    fm = _fm(np.random.default_rng(seed).random((n, 2)), topology)
    a, b = h1_diagram(fm, "dual"), h1_diagram(fm, "reduction")
    assert a.cells.tolist() == b.cells.tolist()
    assert a.essential == b.essential == (2 if topology == "torus" else 0)


def test_equilateral_triangle_has_one_pair():
    fm = _fm(np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]))
    d = h1_diagram(fm)
    assert len(d.positive()) == 1
    assert d.positive()[0] == pytest.approx([0.5, 1 / math.sqrt(3)])


def test_right_triangle_has_no_positive_pair():
    d = h1_diagram(_fm(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])))
    assert len(d.positive()) == 0


def test_gabriel_quadrilateral_pairs_match_oracle():
    # a kite whose two triangles are acute, so all five edges are Gabriel;
    # each acute triangle outlives the loop it closes, giving two positive pairs
    P = np.array([[0.0, 0.0], [1.0, -0.6], [2.0, 0.0], [1.0, 0.6]])
    fm = _fm(P)
    assert len(fm.edge_critical) == 5 and np.all(fm.edge_critical)
    cells = brute_filtration(P)
    ref = rank_persistence(cells)[1][0]
    ref_pairs = sorted((math.sqrt(float(cells[i][0])), math.sqrt(float(cells[j][0]))) for i, j in ref)
    got = sorted(map(tuple, h1_diagram(fm).positive().tolist()))
    assert len(got) == len(ref_pairs) == 2
    assert np.allclose(got, ref_pairs, rtol=1e-12)


def test_one_norm_examples():
    assert one_norm(Diagram(1, np.zeros((0, 2)))) == 0
    assert one_norm(Diagram(1, np.array([[0.0, 1.0], [0.0, 2.0]]))) == 3
    assert one_norm(Diagram(1, np.array([[0.5, 0.5], [0.7, 0.7]]))) == 0


def test_gabriel_graph_examples():
    fm = _fm(np.array([[0.0, 0.0], [0.4, 0.3]]))
    assert gabriel_graph(fm).tolist() == [0]
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    fm = _fm(sq)
    sides = sorted(sorted(e) for e in fm.mosaic.edges[gabriel_graph(fm)].tolist())
    assert sides == [[0, 1], [0, 3], [1, 2], [2, 3]]


def test_gabriel_contains_emst():
    fm = _fm(np.random.default_rng(11).random((400, 2)), "torus")
    assert set(emst(fm).edges.tolist()) <= set(gabriel_graph(fm).tolist())


def test_write_diagrams_csv():
    fm = _fm(np.random.default_rng(12).random((50, 2)), "torus")
    d0, d1 = h0_diagram(fm), h1_diagram(fm)
    buf = io.StringIO()
    write_diagrams_csv([d0, d1], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "degree,birth,death"
    assert sum(line.endswith(",inf") for line in lines) == 1 + 2
    assert len(lines) == 1 + len(d0) + len(d1) + 3
