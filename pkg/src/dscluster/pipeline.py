"""End-to-end clustering runs: data in, labels out.

Both algorithms share the same skeleton — normalize, project onto the data
span, build a similarity graph, spectral-cluster. They differ only in where
the graph comes from: direction-search responses (dsc) or raw inner products
between the points themselves (tsc).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .affinity import (SimilarityGraph, angular_weights, default_neighborhood_size,
                       select_neighborhoods, symmetrize)
from .data import DataMatrix, ProjectedData, RankPolicy, normalize_columns, project_to_span
from .directions import AdmmConfig, DirectionSet, solve_directions
from .evaluation import tsc_similarity
from .spectral import ClusterLabels, spectral_cluster

ALGORITHMS = ("dsc", "tsc")


@dataclass(frozen=True)
class ClusterParams:
    """Everything a clustering run needs besides the data."""

    n_clusters: int
    algorithm: str = "dsc"
    p: int = 2
    mu: float = 3.3
    gamma: float = 0.01
    tol: float = 1e-5
    max_iters: int = 300
    a_update: str = "paper"
    g: int = None                  # neighborhood size; None picks the default rule
    subspace_dim: int = None       # informs the default g when known
    rank_policy: RankPolicy = field(default_factory=RankPolicy.exact)
    exclude_self: bool = False     # drop each point's own index from its neighborhood
    renormalize: bool = False      # renormalize projected columns before the kernel
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be positive")

    def admm_config(self) -> AdmmConfig:
        return AdmmConfig(p=self.p, mu=self.mu, gamma=self.gamma, tol=self.tol,
                          max_iters=self.max_iters, a_update=self.a_update)

    def neighborhood_size(self, m2):
        if self.g is not None:
            if not 1 <= self.g <= m2:
                raise ValueError(f"g={self.g} out of range [1, {m2}]")
            return self.g
        return default_neighborhood_size(m2, n_clusters=self.n_clusters,
                                         subspace_dim=self.subspace_dim)


@dataclass(frozen=True)
class PipelineResult:
    """Labels plus the intermediate products worth inspecting."""

    labels: ClusterLabels
    graph: SimilarityGraph
    projection: ProjectedData
    directions: DirectionSet = None     # None for the tsc path

    @property
    def converged(self):
        return self.directions.converged if self.directions is not None else True

    @property
    def iters_used(self):
        return self.directions.iters_used if self.directions is not None else 0


def dsc_similarity(coords, params: ClusterParams, g):
    """Direction-search similarity graph on projected coordinates.

    Returns (graph, direction_set)."""
    dirset = solve_directions(coords, params.admm_config())
    responses = dirset.responses
    if params.exclude_self:
        responses = responses.copy()
        m2 = responses.shape[0]
        responses[np.arange(m2), np.arange(m2)] = -1.0
    nbrs = select_neighborhoods(responses, g)
    graph = symmetrize(angular_weights(coords, nbrs, renormalize=params.renormalize))
    return graph, dirset


def run_pipeline(data: DataMatrix, params: ClusterParams) -> PipelineResult:
    """Cluster the dataset with the configured algorithm."""
    normalized = normalize_columns(data)
    projected = project_to_span(normalized, params.rank_policy)
    coords = projected.coords
    g = params.neighborhood_size(coords.shape[1])
    if params.algorithm == "dsc":
        graph, dirset = dsc_similarity(coords, params, g)
    else:
        graph = tsc_similarity(DataMatrix(coords, labels=data.labels, source=data.source), g)
        dirset = None
    labels = spectral_cluster(graph, params.n_clusters,
                              restarts=params.restarts, seed=params.seed)
    return PipelineResult(labels=labels, graph=graph, projection=projected,
                          directions=dirset)
