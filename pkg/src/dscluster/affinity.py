"""Similarity-graph construction from direction responses.

Each point keeps its g strongest responses as a neighborhood; neighbor
weights come from the angular kernel exp(-2 * acos(cos)) on the raw
inner products, and the final graph is the symmetrized sum W + W^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import check_matrix


@dataclass(frozen=True)
class NeighborhoodSet:
    """Per-point index sets of the g strongest responses."""

    indices: np.ndarray   # m2 x g int array; row i holds the neighborhood of point i

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.ndim != 2:
            raise ValueError(f"indices must be 2-D, got shape {idx.shape}")
        object.__setattr__(self, "indices", idx)

    @property
    def g(self):
        return self.indices.shape[1]


@dataclass(frozen=True)
class SimilarityGraph:
    """Nonnegative weight matrix over all points, optionally symmetrized."""

    weights: np.ndarray
    symmetrized: bool = False

    def __post_init__(self):
        W = check_matrix(self.weights, "similarity weights")
        if W.shape[0] != W.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {W.shape}")
        if W.min(initial=0.0) < 0:
            raise ValueError("similarity weights must be non-negative")
        object.__setattr__(self, "weights", W)

    @property
    def size(self):
        return self.weights.shape[0]


def default_neighborhood_size(m2, n_clusters=None, subspace_dim=None):
    """Neighborhood cardinality when the caller does not pin one.

    With a known subspace dimension d the default is max(3, d + 1);
    otherwise ceil(m2 / (4 * n_clusters)) clamped to [3, 50].
    """
    if subspace_dim is not None:
        return min(max(3, subspace_dim + 1), m2)
    if n_clusters is None or n_clusters < 1:
        raise ValueError("need n_clusters or subspace_dim to pick a neighborhood size")
    return min(max(3, min(math.ceil(m2 / (4 * n_clusters)), 50)), m2)


def select_neighborhoods(responses, g) -> NeighborhoodSet:
    """Row-wise indices of the g largest responses, ties to the lower index."""
    R = check_matrix(responses, "responses")
    m2 = R.shape[1]
    if not 1 <= g <= m2:
        raise ValueError(f"g={g} out of range [1, {m2}]")
    # Stable sort on the negated values keeps equal entries in ascending
    # column order, which is exactly the tie rule.
    order = np.argsort(-R, axis=1, kind="stable")
    return NeighborhoodSet(indices=order[:, :g])


def angular_weights(X, nbrs: NeighborhoodSet, renormalize=False) -> SimilarityGraph:
    """Angular-kernel weights on the selected neighbor pairs.

    W[i, j] = exp(-2 * acos(clip(x_i . x_j, -1, 1))) for j in the
    neighborhood of i, zero elsewhere. With renormalize=True the columns
    of X are rescaled to unit norm first (useful when a truncated span
    projection has shortened them).
    """
    X = check_matrix(X, "coordinates")
    if renormalize:
        norms = np.linalg.norm(X, axis=0)
        if np.any(norms == 0.0):
            raise ValueError("cannot renormalize a zero column")
        X = X / norms
    m2 = X.shape[1]
    idx = nbrs.indices
    if idx.shape[0] != m2 or idx.min(initial=0) < 0 or idx.max(initial=0) >= m2:
        raise ValueError("neighborhood indices inconsistent with coordinates")
    rows = np.repeat(np.arange(m2), nbrs.g)
    cols = idx.reshape(-1)
    cos = np.einsum("ij,ij->j", X[:, rows], X[:, cols])
    np.clip(cos, -1.0, 1.0, out=cos)
    W = np.zeros((m2, m2))
    W[rows, cols] = np.exp(-2.0 * np.arccos(cos))
    return SimilarityGraph(weights=W, symmetrized=False)


def symmetrize(graph: SimilarityGraph) -> SimilarityGraph:
    """Replace W by W + W^T; rejects a second symmetrization."""
    if graph.symmetrized:
        raise ValueError("graph is already symmetrized")
    return SimilarityGraph(weights=graph.weights + graph.weights.T, symmetrized=True)


def write_edge_list(graph: SimilarityGraph, path):
    """Export nonzero entries as CSV rows i,j,weight (0-based indices)."""
    path = Path(path)
    rows, cols = np.nonzero(graph.weights)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,j,weight\n")
        for i, j in zip(rows, cols):
            fh.write(f"{i},{j},{graph.weights[i, j]:.17g}\n")
    return path
