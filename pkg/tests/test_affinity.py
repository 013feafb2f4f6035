"""Neighborhood selection, angular weighting and symmetrization."""

import math

import numpy as np
import pytest

from dscluster.affinity import (NeighborhoodSet, SimilarityGraph, angular_weights,
                                default_neighborhood_size, select_neighborhoods,
                                symmetrize, write_edge_list)


class TestDefaultNeighborhoodSize:
    def test_dimension_rule(self):
        assert default_neighborhood_size(400, subspace_dim=10) == 11
        assert default_neighborhood_size(400, subspace_dim=1) == 3
        assert default_neighborhood_size(400, subspace_dim=2) == 3

    def test_cluster_rule(self):
        assert default_neighborhood_size(400, n_clusters=4) == \
            math.ceil(400 / (4 * 4))
        assert default_neighborhood_size(400, n_clusters=40) == 3   # floor clamp
        assert default_neighborhood_size(4000, n_clusters=4) == 50  # cap clamp

    def test_dimension_wins_over_clusters(self):
        assert default_neighborhood_size(400, n_clusters=4, subspace_dim=6) == 7

    def test_never_exceeds_point_count(self):
        assert default_neighborhood_size(5, subspace_dim=9) == 5
        assert default_neighborhood_size(2, n_clusters=1) == 2

    def test_requires_some_input(self):
        with pytest.raises(ValueError):
            default_neighborhood_size(400)


class TestSelectNeighborhoods:
    def test_picks_largest_per_row(self):
        R = np.array([[0.1, 0.9, 0.5],
                      [0.7, 0.2, 0.6],
                      [0.3, 0.3, 0.8]])
        nbrs = select_neighborhoods(R, 2)
        assert nbrs.g == 2
        assert list(nbrs.indices[0]) == [1, 2]
        assert list(nbrs.indices[1]) == [0, 2]
        assert list(nbrs.indices[2]) == [2, 0]   # tie 0.3/0.3 -> lower index

    def test_full_width(self):
        R = np.array([[3.0, 1.0, 2.0]] * 3)
        nbrs = select_neighborhoods(R, 3)
        assert [list(r) for r in nbrs.indices] == [[0, 2, 1]] * 3

    def test_all_equal_row_keeps_index_order(self):
        R = np.ones((2, 4))
        nbrs = select_neighborhoods(R, 3)
        assert list(nbrs.indices[0]) == [0, 1, 2]

    @pytest.mark.parametrize("g", [0, 4, -1])
    def test_range_check(self, g):
        with pytest.raises(ValueError, match="out of range"):
            select_neighborhoods(np.ones((3, 3)), g)


class TestAngularWeights:
    def test_kernel_values(self):
        # Three planar unit vectors at angles 0, pi/2 and pi from the first:
        # the kernel maps them to exp(0), exp(-pi) and exp(-2 pi).
        X = np.array([[1.0, 0.0, -1.0],
                      [0.0, 1.0, 0.0]])
        nbrs = NeighborhoodSet(indices=np.array([[0, 1, 2]] * 3))
        W = angular_weights(X, nbrs).weights
        assert W[0, 0] == pytest.approx(1.0)
        assert W[0, 1] == pytest.approx(math.exp(-math.pi))
        assert W[0, 2] == pytest.approx(math.exp(-2.0 * math.pi))

    def test_sparsity_pattern(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((3, 8))
        X /= np.linalg.norm(X, axis=0)
        nbrs = select_neighborhoods(np.abs(X.T @ X), 3)
        graph = angular_weights(X, nbrs)
        assert not graph.symmetrized
        assert (np.count_nonzero(graph.weights, axis=1) == 3).all()
        nz = graph.weights[graph.weights > 0]
        assert (nz <= 1.0).all() and (nz >= math.exp(-2.0 * math.pi)).all()

    def test_renormalize_restores_unit_cosines(self):
        X = np.array([[2.0, 0.0], [0.0, 0.5]])
        nbrs = NeighborhoodSet(indices=np.array([[0], [1]]))
        plain = angular_weights(X, nbrs).weights
        fixed = angular_weights(X, nbrs, renormalize=True).weights
        # Unnormalized self-products 4.0 and 0.25 clip/evaluate away from 1.
        assert plain[0, 0] == pytest.approx(1.0)          # clipped at cos = 1
        assert plain[1, 1] == pytest.approx(math.exp(-2.0 * math.acos(0.25)))
        assert fixed[0, 0] == pytest.approx(1.0)
        assert fixed[1, 1] == pytest.approx(1.0)

    def test_renormalize_rejects_zero_column(self):
        X = np.array([[1.0, 0.0], [0.0, 0.0]])
        nbrs = NeighborhoodSet(indices=np.array([[0], [1]]))
        with pytest.raises(ValueError, match="zero column"):
            angular_weights(X, nbrs, renormalize=True)

    def test_index_validation(self):
        X = np.eye(2)
        nbrs = NeighborhoodSet(indices=np.array([[0], [5]]))
        with pytest.raises(ValueError, match="inconsistent"):
            angular_weights(X, nbrs)

    def test_permutation_equivariance(self):
        # Relabeling the points must permute rows and columns of W jointly.
        rng = np.random.default_rng(1)
        X = rng.standard_normal((4, 7))
        X /= np.linalg.norm(X, axis=0)
        R = np.abs(X.T @ X) + rng.uniform(0.0, 1e-6, (7, 7))  # break ties
        perm = rng.permutation(7)
        W = angular_weights(X, select_neighborhoods(R, 3)).weights
        Wp = angular_weights(X[:, perm],
                             select_neighborhoods(R[np.ix_(perm, perm)], 3)).weights
        assert np.allclose(Wp, W[np.ix_(perm, perm)])


class TestSymmetrize:
    def test_sum_with_transpose(self):
        W = np.array([[0.0, 1.0], [0.25, 0.0]])
        graph = symmetrize(SimilarityGraph(weights=W))
        assert graph.symmetrized
        assert np.allclose(graph.weights, [[0.0, 1.25], [1.25, 0.0]])

    def test_double_symmetrize_rejected(self):
        graph = symmetrize(SimilarityGraph(weights=np.ones((2, 2))))
        with pytest.raises(ValueError, match="already"):
            symmetrize(graph)

    def test_weight_ranges(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((3, 10))
        X /= np.linalg.norm(X, axis=0)
        raw = angular_weights(X, select_neighborhoods(np.abs(X.T @ X), 4))
        sym = symmetrize(raw)
        assert raw.weights.max() <= 1.0
        assert sym.weights.max() <= 2.0
        assert np.allclose(sym.weights, sym.weights.T)


class TestSimilarityGraph:
    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError, match="non-negative"):
            SimilarityGraph(weights=np.array([[0.0, -0.1], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            SimilarityGraph(weights=np.zeros((2, 3)))

    def test_size(self):
        assert SimilarityGraph(weights=np.zeros((4, 4))).size == 4


def test_write_edge_list(tmp_path):
    W = np.array([[0.0, 0.5], [0.0, 0.125]])
    graph = SimilarityGraph(weights=W)
    out = write_edge_list(graph, tmp_path / "edges.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "i,j,weight"
    assert lines[1] == "0,1,0.5"
    assert lines[2] == "1,1,0.125"
    assert len(lines) == 3
