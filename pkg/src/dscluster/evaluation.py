"""Clustering-error metric, nearest-neighbor baseline, and subspace diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .affinity import SimilarityGraph, angular_weights, select_neighborhoods, symmetrize
from .data import DataMatrix
from .linalg import check_matrix, orthonormal_basis
from .spectral import ClusterLabels

INNOVATION_TOL = 1e-8


class NoInnovationError(ValueError):
    """The queried subspace lies entirely in the direct sum of the others."""


@dataclass(frozen=True)
class InnovationBasis:
    """Orthonormal basis of the part of one subspace outside all the others."""

    basis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis", check_matrix(self.basis, "innovation basis"))

    @property
    def dim(self):
        return self.basis.shape[1]


def clustering_error(predicted: ClusterLabels, truth: ClusterLabels):
    """Percent of misclassified points under the best label matching.

    The matching is an optimal assignment on the confusion matrix, so the
    result is exact over all bijections between predicted and true labels.
    """
    pred, true = predicted.labels, truth.labels
    if pred.shape != true.shape:
        raise ValueError(
            f"label length mismatch: {pred.shape[0]} predicted vs {true.shape[0]} true")
    m2 = pred.shape[0]
    if m2 == 0:
        raise ValueError("empty labelings")
    k = max(predicted.n_clusters, truth.n_clusters)
    confusion = np.zeros((k, k), dtype=int)
    np.add.at(confusion, (pred, true), 1)
    rows, cols = linear_sum_assignment(-confusion)
    matched = confusion[rows, cols].sum()
    return 100.0 * (m2 - matched) / m2


def tsc_similarity(data: DataMatrix, g) -> SimilarityGraph:
    """Similarity graph whose neighborhoods come from raw inner products.

    Point i keeps the g largest entries of |d_i^T D| excluding itself, then
    edges get the same angular weights as the direction-based graph.
    """
    X = data.matrix
    m2 = X.shape[1]
    if not 1 <= g <= m2 - 1:
        raise ValueError(f"neighborhood size g={g} out of range [1, {m2 - 1}]")
    responses = np.abs(X.T @ X)
    # A point never neighbors itself: bury the diagonal below every |response|.
    responses[np.arange(m2), np.arange(m2)] = -1.0
    nbrs = select_neighborhoods(responses, g)
    return symmetrize(angular_weights(X, nbrs))


def innovation_basis(bases, i) -> InnovationBasis:
    """Orthonormalized (I - C_i C_i^T) V_i, the i-th subspace's own part.

    C_i spans the direct sum of every other subspace. Raises
    NoInnovationError when V_i's span sits inside that sum.
    """
    if not 0 <= i < len(bases):
        raise ValueError(f"index {i} out of range for {len(bases)} bases")
    if len(bases) < 2:
        raise ValueError("need at least two subspaces")
    v = check_matrix(bases[i], f"basis {i}")
    others = np.hstack([bases[k] for k in range(len(bases)) if k != i])
    c = orthonormal_basis(others)
    residual = v - c @ (c.T @ v)
    if np.linalg.norm(residual, 2) <= INNOVATION_TOL:
        raise NoInnovationError(
            f"subspace {i} lies in the direct sum of the others")
    return InnovationBasis(orthonormal_basis(residual, tol=INNOVATION_TOL))
