"""Normalized spectral clustering of a symmetrized similarity graph.

Symmetric normalized Laplacian, row-normalized embedding of the
bottom eigenvectors, and a deterministic k-means back end with greedy
farthest-point seeding and independent restarts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import SimilarityGraph
from .linalg import check_matrix, sym_eig

ISOLATED_DEGREE = 1e-12
KMEANS_SHIFT_TOL = 1e-9
KMEANS_MAX_ITERS = 300


@dataclass(frozen=True)
class ClusterLabels:
    """Integer cluster assignment for every point."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=int)
        if lab.ndim != 1:
            raise ValueError(f"labels must be a vector, got shape {lab.shape}")
        if lab.size and (lab.min() < 0 or lab.max() >= self.n_clusters):
            raise ValueError(f"labels must lie in [0, {self.n_clusters})")
        object.__setattr__(self, "labels", lab)


def _restart_rng(seed, restart):
    # Stream derived from (seed, restart) so serial and parallel restarts agree.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(restart,)))


def _squared_distances(points, centers):
    p2 = np.einsum("ij,ij->i", points, points)[:, None]
    c2 = np.einsum("ij,ij->i", centers, centers)[None, :]
    d2 = p2 + c2 - 2.0 * points @ centers.T
    np.maximum(d2, 0.0, out=d2)
    return d2


def _farthest_point_seeds(points, k, rng):
    n = points.shape[0]
    seeds = [int(rng.integers(n))]
    min_d2 = _squared_distances(points, points[seeds[-1]][None, :])[:, 0]
    while len(seeds) < k:
        nxt = int(np.argmax(min_d2))
        seeds.append(nxt)
        np.minimum(min_d2, _squared_distances(points, points[nxt][None, :])[:, 0],
                   out=min_d2)
    return points[seeds].copy()


def _lloyd(points, centers):
    n, k = points.shape[0], centers.shape[0]
    labels = np.zeros(n, dtype=int)
    for _ in range(KMEANS_MAX_ITERS):
        d2 = _squared_distances(points, centers)
        labels = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = points[members].mean(axis=0)
            else:
                # Reseed an emptied centroid at the point farthest from its center.
                farthest = int(np.argmax(d2[np.arange(n), labels]))
                new_centers[j] = points[farthest]
        shift = np.linalg.norm(new_centers - centers, axis=1).max()
        centers = new_centers
        if shift < KMEANS_SHIFT_TOL:
            break
    d2 = _squared_distances(points, centers)
    labels = np.argmin(d2, axis=1)
    cost = float(d2[np.arange(n), labels].sum())
    return labels, cost


def kmeans(points, k, restarts=20, seed=0) -> ClusterLabels:
    """Best-of-restarts Lloyd clustering of row-vector points.

    Deterministic given (points, k, restarts, seed); each restart draws
    from its own RNG stream and the lowest-cost labeling wins.
    """
    P = check_matrix(points, "points")
    n = P.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    best_labels, best_cost = None, np.inf
    for restart in range(restarts):
        rng = _restart_rng(seed, restart)
        centers = _farthest_point_seeds(P, k, rng)
        labels, cost = _lloyd(P, centers)
        if cost < best_cost:
            best_labels, best_cost = labels, cost
    return ClusterLabels(labels=best_labels, n_clusters=k)


def normalized_laplacian(graph: SimilarityGraph):
    """Symmetric normalized Laplacian I - Deg^-1/2 W Deg^-1/2."""
    if not graph.symmetrized:
        raise ValueError("graph must be symmetrized first")
    W = graph.weights
    deg = W.sum(axis=1)
    deg = np.where(deg > 0.0, deg, ISOLATED_DEGREE)
    inv_sqrt = 1.0 / np.sqrt(deg)
    L = -(inv_sqrt[:, None] * W) * inv_sqrt[None, :]
    L[np.arange(L.shape[0]), np.arange(L.shape[0])] += 1.0
    # Degree scaling introduces rounding asymmetry beyond the eig gate.
    return 0.5 * (L + L.T)


def spectral_embedding(graph: SimilarityGraph, n_clusters):
    """Row-normalized matrix of the n_clusters bottom Laplacian eigenvectors."""
    L = normalized_laplacian(graph)
    _, vectors = sym_eig(L, n_clusters, which="smallest")
    norms = np.linalg.norm(vectors, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    return vectors / safe[:, None]


def spectral_cluster(graph: SimilarityGraph, n_clusters, restarts=20, seed=0) -> ClusterLabels:
    """Cluster the graph into n_clusters groups."""
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be >= 1, got {n_clusters}")
    if n_clusters > graph.size:
        raise ValueError(f"n_clusters={n_clusters} exceeds point count {graph.size}")
    embedding = spectral_embedding(graph, n_clusters)
    return kmeans(embedding, n_clusters, restarts=restarts, seed=seed)


def estimate_cluster_count(graph: SimilarityGraph, max_clusters):
    """Eigengap heuristic: index of the largest gap among the smallest
    Laplacian eigenvalues. Diagnostic only; the pipeline takes the cluster
    count as an input."""
    L = normalized_laplacian(graph)
    k = min(max_clusters + 1, graph.size)
    values, _ = sym_eig(L, k, which="smallest")
    gaps = np.diff(values)
    return int(np.argmax(gaps)) + 1
