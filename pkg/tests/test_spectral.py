"""Spectral clustering back end: k-means, Laplacian, embedding."""

import numpy as np
import pytest

from dscluster.affinity import SimilarityGraph, symmetrize
from dscluster.spectral import (ClusterLabels, _lloyd, estimate_cluster_count,
                                kmeans, normalized_laplacian, spectral_cluster,
                                spectral_embedding)


def two_cloud_points(seed=0, n_per=20, gap=10.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_per, 2))
    b = rng.standard_normal((n_per, 2)) + np.array([gap, 0.0])
    return np.vstack([a, b])


def block_graph(sizes, within=1.0, between=0.0):
    n = sum(sizes)
    W = np.full((n, n), between)
    start = 0
    for s in sizes:
        W[start:start + s, start:start + s] = within
        start += s
    np.fill_diagonal(W, 0.0)
    return symmetrize(SimilarityGraph(weights=0.5 * W))


class TestClusterLabels:
    def test_valid(self):
        lab = ClusterLabels(labels=np.array([0, 1, 1]), n_clusters=2)
        assert lab.labels.dtype == int

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            ClusterLabels(labels=np.array([0, 2]), n_clusters=2)
        with pytest.raises(ValueError):
            ClusterLabels(labels=np.array([-1, 0]), n_clusters=2)

    def test_not_vector(self):
        with pytest.raises(ValueError):
            ClusterLabels(labels=np.zeros((2, 2)), n_clusters=2)


class TestKmeans:
    def test_separated_clouds(self):
        P = two_cloud_points()
        out = kmeans(P, 2, seed=3)
        assert out.n_clusters == 2
        assert len(set(out.labels[:20])) == 1
        assert len(set(out.labels[20:])) == 1
        assert out.labels[0] != out.labels[20]

    def test_k_equals_n_is_free(self):
        P = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
        out = kmeans(P, 3)
        assert sorted(out.labels) == [0, 1, 2]

    def test_one_dimensional_pairs(self):
        P = np.array([[0.0], [1.0], [10.0], [11.0]])
        out = kmeans(P, 2, seed=1)
        assert out.labels[0] == out.labels[1]
        assert out.labels[2] == out.labels[3]
        assert out.labels[0] != out.labels[2]

    def test_deterministic(self):
        P = two_cloud_points(seed=4)
        a = kmeans(P, 2, restarts=5, seed=7).labels
        b = kmeans(P, 2, restarts=5, seed=7).labels
        assert np.array_equal(a, b)

    def test_single_cluster(self):
        P = two_cloud_points()
        out = kmeans(P, 1)
        assert set(out.labels) == {0}

    def test_validation(self):
        P = np.zeros((3, 2))
        with pytest.raises(ValueError):
            kmeans(P, 0)
        with pytest.raises(ValueError):
            kmeans(P, 4)
        with pytest.raises(ValueError):
            kmeans(P, 2, restarts=0)

    def test_lloyd_reaches_local_optimum(self):
        # From deliberately bad seeds (both in the left cloud), Lloyd must
        # still not increase the cost of the final assignment re-read.
        P = two_cloud_points(seed=5)
        centers = P[:2].copy()
        labels, cost = _lloyd(P, centers)
        d2_start = ((P[:, None, :] - P[:2][None, :, :]) ** 2).sum(axis=2)
        start_cost = d2_start.min(axis=1).sum()
        assert cost <= start_cost + 1e-12
        assert labels.shape == (40,)


class TestLaplacian:
    def test_matches_hand_formula(self):
        graph = block_graph([2, 2], within=1.0, between=0.5)
        W = graph.weights
        deg = W.sum(axis=1)
        expected = np.eye(4) - W / np.sqrt(np.outer(deg, deg))
        L = normalized_laplacian(graph)
        assert np.allclose(L, expected)
        assert np.allclose(L, L.T)

    def test_requires_symmetrized(self):
        raw = SimilarityGraph(weights=np.ones((3, 3)))
        with pytest.raises(ValueError, match="symmetrized"):
            normalized_laplacian(raw)

    def test_isolated_vertex_stays_finite(self):
        W = np.zeros((3, 3))
        W[0, 1] = W[1, 0] = 1.0
        graph = SimilarityGraph(weights=W, symmetrized=True)
        L = normalized_laplacian(graph)
        assert np.isfinite(L).all()
        assert L[2, 2] == pytest.approx(1.0)

    def test_zero_eigenvalue_count_equals_components(self):
        graph = block_graph([3, 4, 2])
        L = normalized_laplacian(graph)
        vals = np.linalg.eigvalsh(L)
        assert np.count_nonzero(vals < 1e-10) == 3


class TestSpectralCluster:
    def test_block_diagonal_exact(self):
        graph = block_graph([5, 7])
        out = spectral_cluster(graph, 2, seed=0)
        assert len(set(out.labels[:5])) == 1
        assert len(set(out.labels[5:])) == 1
        assert out.labels[0] != out.labels[5]

    def test_three_blocks_with_weak_bridges(self):
        graph = block_graph([6, 6, 6], within=1.0, between=0.01)
        out = spectral_cluster(graph, 3, seed=0)
        groups = [set(out.labels[i * 6:(i + 1) * 6]) for i in range(3)]
        assert all(len(g) == 1 for g in groups)
        assert len(groups[0] | groups[1] | groups[2]) == 3

    def test_embedding_rows_unit_norm(self):
        graph = block_graph([4, 4], between=0.2)
        E = spectral_embedding(graph, 2)
        assert E.shape == (8, 2)
        assert np.allclose(np.linalg.norm(E, axis=1), 1.0)

    def test_too_many_clusters_rejected(self):
        graph = block_graph([2, 2])
        with pytest.raises(ValueError, match="exceeds"):
            spectral_cluster(graph, 5)
        with pytest.raises(ValueError):
            spectral_cluster(graph, 0)

    def test_deterministic(self):
        graph = block_graph([5, 5], between=0.05)
        a = spectral_cluster(graph, 2, seed=9).labels
        b = spectral_cluster(graph, 2, seed=9).labels
        assert np.array_equal(a, b)


class TestEstimateClusterCount:
    def test_clean_blocks(self):
        graph = block_graph([5, 5, 5], within=1.0, between=0.001)
        assert estimate_cluster_count(graph, 6) == 3

    def test_two_blocks(self):
        graph = block_graph([8, 8], within=1.0, between=0.001)
        assert estimate_cluster_count(graph, 5) == 2
