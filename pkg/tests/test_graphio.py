import pytest

from schedge.graphio import (Graph, GraphLoadError, load_edge_list, load_graph,
                             load_matrix_market, out_degree,
                             with_random_weights)
from util import random_directed


def write(tmp_path, text, name="g.el"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_symmetrize_two_edges(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n1 2\n"), symmetrize=True)
    assert g.num_vertices == 3
    assert g.num_edges == 4
    arcs = set(zip(g.coo_src, g.coo_dst))
    assert arcs == {(0, 1), (1, 0), (1, 2), (2, 1)}
    assert g.symmetric


def test_weighted_csr_construction(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 5\n0 2 7\n"), weighted=True)
    assert g.out_offsets == [0, 2, 2, 2]
    assert g.out_neighbors == [1, 2]
    assert g.out_weights == [5, 7]
    assert g.weighted


def test_empty_file_is_error(tmp_path):
    with pytest.raises(GraphLoadError, match="no edges"):
        load_edge_list(write(tmp_path, ""))
    with pytest.raises(GraphLoadError, match="no edges"):
        load_edge_list(write(tmp_path, "# only comments\n% more\n"))


def test_malformed_line_reports_line_number(tmp_path):
    with pytest.raises(GraphLoadError, match=":3"):
        load_edge_list(write(tmp_path, "0 1\n1 2\njunk\n"))
    with pytest.raises(GraphLoadError, match=":2"):
        load_edge_list(write(tmp_path, "0 1\nx y\n"))


def test_weight_token_rules(tmp_path):
    # extra token ignored when weighted is off
    g = load_edge_list(write(tmp_path, "0 1 5\n"))
    assert not g.weighted
    with pytest.raises(GraphLoadError, match="missing weight"):
        load_edge_list(write(tmp_path, "0 1 5\n1 2\n"), weighted=True)
    with pytest.raises(GraphLoadError, match="negative"):
        load_edge_list(write(tmp_path, "0 1 -3\n"), weighted=True)


def test_out_degree_from_offsets():
    g = Graph.from_coo(3, [0, 0, 2, 2, 2], [1, 2, 0, 1, 2])
    assert g.out_offsets == [0, 2, 2, 5]
    assert out_degree(g, 0) == 2
    assert out_degree(g, 1) == 0
    assert out_degree(g, 2) == 3
    with pytest.raises(ValueError, match="out of range"):
        out_degree(g, 3)


def test_offsets_are_monotone_and_bounded():
    g = random_directed(50, 200, seed=1)
    assert g.out_offsets[0] == 0
    assert g.out_offsets[-1] == g.num_edges
    assert all(a <= b for a, b in zip(g.out_offsets, g.out_offsets[1:]))
    assert all(0 <= v < g.num_vertices for v in g.out_neighbors)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_csr_views_encode_same_multiset(seed):
    g = random_directed(40, 150, seed, weighted=True)
    coo = g.edge_multiset()
    out_view = sorted(
        (u, g.out_neighbors[ei], g.out_weights[ei])
        for u in range(g.num_vertices)
        for ei in range(g.out_offsets[u], g.out_offsets[u + 1])
    )
    in_view = sorted(
        (g.in_neighbors[ei], v, g.in_weights[ei])
        for v in range(g.num_vertices)
        for ei in range(g.in_offsets[v], g.in_offsets[v + 1])
    )
    assert out_view == coo
    assert in_view == coo


def test_transpose_of_transpose(tmp_path):
    g = random_directed(30, 80, seed=9)
    # rebuild from the transposed view flipped back
    flipped = Graph.from_coo(
        g.num_vertices,
        [g.in_neighbors[ei] for v in range(g.num_vertices)
         for ei in range(g.in_offsets[v], g.in_offsets[v + 1])],
        [v for v in range(g.num_vertices)
         for _ in range(g.in_offsets[v], g.in_offsets[v + 1])],
    )
    assert flipped.edge_multiset() == g.edge_multiset()


@pytest.mark.parametrize("seed", [5, 6])
def test_symmetrized_graph_has_all_mirrors(tmp_path, seed):
    g = random_directed(25, 60, seed)
    lines = "".join("%d %d\n" % (u, v) for u, v in zip(g.coo_src, g.coo_dst))
    gs = load_edge_list(write(tmp_path, lines), symmetrize=True)
    arcs = set(zip(gs.coo_src, gs.coo_dst))
    assert all((v, u) in arcs for u, v in arcs)
    assert len(arcs) == gs.num_edges  # no duplicate arcs survive


def test_symmetrize_collapse_is_counted(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n1 0\n0 1\n"), symmetrize=True)
    assert g.num_edges == 2
    assert g.diagnostics["duplicates_collapsed"] == 4


def test_matrix_market_general(tmp_path):
    text = ("%%MatrixMarket matrix coordinate integer general\n"
            "% comment\n"
            "3 3 2\n"
            "1 2 5\n"
            "3 1 7\n")
    g = load_matrix_market(write(tmp_path, text, "g.mtx"), weighted=True)
    assert g.num_vertices == 3
    assert sorted(zip(g.coo_src, g.coo_dst, g.coo_weights)) == [(0, 1, 5), (2, 0, 7)]


def test_matrix_market_symmetric_mirrors(tmp_path):
    text = ("%%MatrixMarket matrix coordinate pattern symmetric\n"
            "3 3 2\n"
            "2 1\n"
            "3 2\n")
    g = load_graph(write(tmp_path, text, "g.mtx"))
    arcs = set(zip(g.coo_src, g.coo_dst))
    assert arcs == {(1, 0), (0, 1), (2, 1), (1, 2)}
    assert g.symmetric


def test_random_weights_are_seeded_and_bounded():
    g = random_directed(20, 50, seed=3)
    w1 = with_random_weights(g, 1, 1000, seed=42)
    w2 = with_random_weights(g, 1, 1000, seed=42)
    w3 = with_random_weights(g, 1, 1000, seed=43)
    assert w1.coo_weights == w2.coo_weights
    assert w1.coo_weights != w3.coo_weights
    assert all(1 <= w <= 1000 for w in w1.coo_weights)
    assert w1.edge_multiset() != g.edge_multiset() or g.weighted


def test_vertex_id_out_of_range_rejected():
    with pytest.raises(GraphLoadError, match="out of range"):
        Graph.from_coo(3, [0, 5], [1, 2])
