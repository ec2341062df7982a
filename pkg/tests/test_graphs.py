import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probgsp.graphs import (
    Graph,
    adjacency_with_loops,
    correlation_threshold_graph,
    grid_2d,
    knn_graph,
    laplacian,
    laplacian_matrix,
    scale_free_graph,
    split_axes,
)
from probgsp.oracles import oracle_bfs_distances, oracle_correlation_edges, oracle_knn_edges

# Edge sets from the brute-force enumerators on the seeded inputs below.
KNN_SEED0_K3 = {
    (0, 1), (0, 5), (0, 6), (0, 7), (0, 8), (0, 9), (1, 7), (1, 9), (2, 3), (2, 4),
    (2, 8), (3, 4), (3, 8), (3, 9), (4, 8), (5, 6), (5, 7), (6, 7),
}
CORR_SEED1_TAU04 = {(1, 3)}


def test_grid_small():
    g = grid_2d(1, 2)
    assert g.edges == ((0, 1, 1.0),)
    assert grid_2d(2, 2).num_edges == 4


def test_grid_28():
    g = grid_2d(28, 28)
    assert g.n == 784 and g.num_edges == 2 * 28 * 27


def test_split_axes():
    h, v = split_axes(grid_2d(2, 2))
    assert h.num_edges == 2 and v.num_edges == 2
    h, v = split_axes(grid_2d(1, 3))
    assert h.num_edges == 2 and v.num_edges == 0


@given(st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=30, deadline=None)
def test_split_axes_partitions(rows, cols):
    g = grid_2d(rows, cols)
    h, v = split_axes(g)
    assert not (h.edge_set() & v.edge_set())
    assert h.edge_set() | v.edge_set() == g.edge_set()
    np.testing.assert_array_equal(laplacian_matrix(h) + laplacian_matrix(v), laplacian_matrix(g))


def test_split_axes_rejects_non_lattice():
    with pytest.raises(ValueError):
        split_axes(Graph(3, ((0, 1, 1.0), (1, 2, 1.0))))


def test_knn_collinear_is_path():
    g = knn_graph([[0.0], [1.0], [2.5]], 1)
    assert g.edge_set() == {(0, 1), (1, 2)}


def test_knn_complete():
    pts = np.random.default_rng(3).uniform(size=(6, 2))
    assert knn_graph(pts, 5).num_edges == 15


def test_knn_frozen_oracle():
    pts = np.random.default_rng(0).uniform(size=(10, 2))
    assert oracle_knn_edges(pts, 3) == KNN_SEED0_K3
    assert knn_graph(pts, 3).edge_set() == KNN_SEED0_K3


def test_knn_ties_and_errors():
    # Equidistant neighbours: the lower index wins.
    g = knn_graph([[0.0], [-1.0], [1.0]], 1)
    assert (0, 1) in g.edge_set() and (0, 2) in g.edge_set()
    with pytest.raises(ValueError):
        knn_graph(np.zeros((3, 2)) + np.arange(3)[:, None], 3)


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_knn_matches_oracle_and_degree(seed, k):
    pts = np.random.default_rng(seed).normal(size=(9, 3))
    g = knn_graph(pts, k)
    assert g.edge_set() == oracle_knn_edges(pts, k)
    assert (np.array([len(nb) for nb in g.neighbors()]) >= k).all()


def test_correlation_graph():
    a = np.array([1.0, 2.0, 0.5, 3.0])
    assert correlation_threshold_graph(np.vstack([a, a]), 0.9).edge_set() == {(0, 1)}
    ortho = np.array([[1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0]])
    assert correlation_threshold_graph(ortho, 0.5).num_edges == 0
    S = np.random.default_rng(1).standard_normal((5, 8))
    assert oracle_correlation_edges(S, 0.4) == CORR_SEED1_TAU04
    assert correlation_threshold_graph(S, 0.4).edge_set() == CORR_SEED1_TAU04


def test_correlation_zero_variance():
    with pytest.raises(ValueError, match="row 1"):
        correlation_threshold_graph(np.array([[1.0, 2.0, 3.0], [2.0, 2.0, 2.0]]), 0.5)


def test_laplacian_examples():
    p2 = Graph(2, ((0, 1, 1.0),))
    np.testing.assert_array_equal(laplacian_matrix(p2), [[1, -1], [-1, 1]])
    np.testing.assert_allclose(sorted(laplacian(grid_2d(2, 2)).eigenvalues), [0, 2, 2, 4], atol=1e-12)
    np.testing.assert_array_equal(adjacency_with_loops(p2).matrix, [[1, 1], [1, 1]])


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_laplacian_invariants(seed):
    g = scale_free_graph(15, 2, seed)
    L = laplacian_matrix(g)
    np.testing.assert_array_equal(L, L.T)
    assert np.abs(L.sum(1)).max() <= 1e-10
    assert np.linalg.eigvalsh(L).min() >= -1e-10
    d = oracle_bfs_distances(g.n, g.edges, 0)
    np.testing.assert_array_equal(g.bfs_distances(0), d)
