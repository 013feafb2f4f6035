"""Direction-search subspace clustering toolkit.

Finds, for every data point, the direction in the data span with unit
response on that point and minimal response on everything else; builds an
angular similarity graph from the responses; spectral-clusters the graph.
Ships a synthetic union-of-subspaces generator, a nearest-neighbor baseline,
and a seeded benchmark harness.
"""

from .affinity import (NeighborhoodSet, SimilarityGraph, angular_weights,
                       default_neighborhood_size, select_neighborhoods, symmetrize)
from .benchmark import (BenchSpec, ExperimentResult, TrialRow, run_experiment,
                        run_face_experiment, write_results)
from .data import (DataMatrix, ProjectedData, RankPolicy, load_matrix,
                   normalize_columns, project_to_span, write_matrix)
from .directions import (AdmmConfig, AdmmState, DirectionSet, DivergenceError,
                         column_shrink, response_objective, soft_threshold,
                         solve_directions)
from .evaluation import (InnovationBasis, NoInnovationError, clustering_error,
                         innovation_basis, tsc_similarity)
from .pipeline import ClusterParams, PipelineResult, run_pipeline
from .spectral import ClusterLabels, kmeans, spectral_cluster
from .synth import NoiseSpec, SynthConfig, add_noise, generate, subspace_bases

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "AdmmState", "BenchSpec", "ClusterLabels", "ClusterParams",
    "DataMatrix", "DirectionSet", "DivergenceError", "ExperimentResult",
    "InnovationBasis", "NeighborhoodSet", "NoInnovationError", "NoiseSpec",
    "PipelineResult", "ProjectedData", "RankPolicy", "SimilarityGraph",
    "SynthConfig", "TrialRow", "add_noise", "angular_weights",
    "clustering_error", "column_shrink", "default_neighborhood_size",
    "generate", "innovation_basis", "kmeans", "load_matrix",
    "normalize_columns", "project_to_span", "response_objective",
    "run_experiment", "run_face_experiment", "run_pipeline",
    "select_neighborhoods", "soft_threshold", "solve_directions",
    "spectral_cluster", "subspace_bases", "symmetrize", "tsc_similarity",
    "write_matrix", "write_results",
]
