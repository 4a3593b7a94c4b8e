import numpy as np
import pytest

import conprop as cp
from helpers import bfs_distances, graph_diameter


def test_build_smallest_graph():
    g = cp.build_graph(2, [(0, 1)])
    assert g.n == 2
    assert g.undirected_edges == ((0, 1),)
    assert list(zip(g.src, g.dst)) == [(0, 1), (1, 0)]
    assert g.directed_edge_index(0, 1) == 0
    assert g.directed_edge_index(1, 0) == 1


def test_build_path_adjacency():
    g = cp.build_graph(3, [(0, 1), (1, 2)])
    assert g.adjacency[1] == (0, 2)
    assert g.adjacency[0] == (1,)


@pytest.mark.parametrize(
    "n,edges,match",
    [
        (3, [(0, 1)], "disconnected"),
        (3, [(0, 0), (0, 1), (1, 2)], "self-loop"),
        (3, [(0, 1), (1, 0), (1, 2)], "duplicate edge"),
        (3, [(0, 1), (1, 3)], "out of range"),
    ],
)
def test_build_rejects_bad_input(n, edges, match):
    with pytest.raises(ValueError, match=match):
        cp.build_graph(n, edges)


def test_error_names_offending_edge():
    with pytest.raises(ValueError, match=r"\(1,5\)"):
        cp.build_graph(3, [(0, 1), (1, 5)])


def test_cycle_triangle():
    g = cp.generate_cycle(3)
    assert g.num_undirected == 3
    assert g.num_directed == 6


def test_cycle_degrees():
    g = cp.generate_cycle(4)
    assert np.all(g.degrees == 2)
    assert g.regular_degree() == 2


def test_cycle_too_small():
    with pytest.raises(ValueError):
        cp.generate_cycle(2)


def test_torus_1d_is_cycle():
    assert cp.generate_torus(1, 5).undirected_edges == cp.generate_cycle(5).undirected_edges


def test_torus_2d_degrees():
    g = cp.generate_torus(2, 3)
    assert g.n == 9
    assert np.all(g.degrees == 4)


def test_torus_edge_count():
    # n * 2m / 2 undirected edges
    g = cp.generate_torus(2, 4)
    assert g.n == 16
    assert g.num_undirected == 32


def test_torus_side_too_small():
    with pytest.raises(ValueError):
        cp.generate_torus(2, 2)


def test_random_regular_forced_k4():
    g = cp.generate_random_regular(4, 3, seed=11)
    assert g.undirected_edges == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_random_regular_degree_contract():
    g = cp.generate_random_regular(10, 3, seed=7)
    assert np.all(g.degrees == 3)
    assert len(bfs_distances(g.adjacency, 0)) == 10


def test_random_regular_parity_error():
    with pytest.raises(ValueError, match="even"):
        cp.generate_random_regular(5, 3, seed=0)


def test_random_regular_seed_determinism():
    a = cp.generate_random_regular(12, 3, seed=5)
    b = cp.generate_random_regular(12, 3, seed=5)
    c = cp.generate_random_regular(12, 3, seed=6)
    assert a.undirected_edges == b.undirected_edges
    assert a.undirected_edges != c.undirected_edges


def test_tree_path():
    g = cp.generate_tree(3, shape="path")
    assert g.undirected_edges == ((0, 1), (1, 2))
    assert graph_diameter(g) == 2


def test_tree_balanced_binary_diameter():
    assert graph_diameter(cp.generate_tree(7, shape="balanced")) == 4


def test_tree_two_nodes():
    assert cp.generate_tree(2).undirected_edges == ((0, 1),)


def test_tree_random_is_tree():
    for seed in range(5):
        g = cp.generate_tree(20, shape="random", seed=seed)
        assert g.num_undirected == 19
        assert len(bfs_distances(g.adjacency, 0)) == 20
    assert (
        cp.generate_tree(20, seed=1).undirected_edges
        == cp.generate_tree(20, seed=1).undirected_edges
    )


@pytest.mark.parametrize(
    "g",
    [
        cp.generate_cycle(9),
        cp.generate_torus(2, 3),
        cp.generate_random_regular(10, 4, seed=3),
        cp.generate_tree(17, shape="random", seed=4),
    ],
    ids=["cycle", "torus", "regular", "tree"],
)
def test_directed_index_invariants(g):
    m = g.num_directed
    assert m == 2 * g.num_undirected
    # lexicographic order and bijection onto 0..m-1
    keys = [(int(i), int(j)) for i, j in zip(g.src, g.dst)]
    assert keys == sorted(keys)
    assert len(set(keys)) == m
    # reverse is an involution pairing (i,j) with (j,i)
    assert np.all(g.reverse[g.reverse] == np.arange(m))
    assert np.all(g.src[g.reverse] == g.dst)
    # adjacency symmetric
    for i in range(g.n):
        for j in g.adjacency[i]:
            assert i in g.adjacency[j]
    # undirected_index pairs both orientations to the same edge
    assert np.all(g.undirected_index[g.reverse] == g.undirected_index)


def test_edge_list_roundtrip(tmp_path):
    g = cp.generate_random_regular(10, 3, seed=1)
    path = tmp_path / "g.edges"
    cp.write_edge_list(g, path)
    text = path.read_text().splitlines()
    assert text[0] == "n 10"
    g2 = cp.read_edge_list(path)
    assert g2.undirected_edges == g.undirected_edges


def test_edge_list_bad_header(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n")
    with pytest.raises(ValueError, match="first line"):
        cp.read_edge_list(path)


def test_weights_uniform_default():
    g = cp.generate_cycle(4)
    w = cp.EdgeWeights.uniform(g)
    assert np.all(w.values == 1.0)
    assert np.all(w.per_directed_edge(g) == 1.0)


def test_weights_from_mapping():
    g = cp.build_graph(3, [(0, 1), (1, 2)])
    w = cp.EdgeWeights.from_mapping(g, {(1, 0): 2.0, (1, 2): 3.0})
    assert w.values.tolist() == [2.0, 3.0]
    with pytest.raises(ValueError, match="missing weight"):
        cp.EdgeWeights.from_mapping(g, {(0, 1): 2.0})
    with pytest.raises(ValueError, match="non-edge"):
        cp.EdgeWeights.from_mapping(g, {(0, 1): 2.0, (1, 2): 3.0, (0, 2): 1.0})


def test_weights_must_be_positive():
    g = cp.generate_cycle(3)
    with pytest.raises(ValueError):
        cp.EdgeWeights(np.array([1.0, 0.0, 1.0]))


def test_bipartite_detection():
    assert cp.generate_cycle(4).is_bipartite()
    assert not cp.generate_cycle(5).is_bipartite()
    assert cp.generate_tree(9, shape="balanced").is_bipartite()
