"""Infer the latent geometry of a network from a single observed graph.

Estimates a clique-to-clique distance matrix under the latent space model
and applies isometric-embedding signature tests, bootstrap hypothesis
tests, a curvature minimizer, and a bootstrap rank estimator to recover
the manifold class (flat / spherical / hyperbolic), its curvature, and
its minimal dimension.  A simulator for all three geometries supports
Monte Carlo studies.
"""

__version__ = "0.1.0"

from .cliques import CliqueSelectionError, CliqueSet, almost_clique, enumerate_cliques, select_cliques
from .curvature import CurvatureBracket, CurvatureEstimate, curvature_bounds, estimate_curvature
from .dimension import LadleResult, dimension_from_rank, ladle_rank
from .distance import DistanceMatrix, ENuHat, ProbMatrix, distances_from_graph, estimate_d, estimate_e_nu, estimate_p
from .geometry import (
    EmbeddingCheck,
    Geometry,
    ManifoldSpec,
    Signature,
    cosine_form,
    eig_sym,
    embeddable,
    geodesic_distance,
    gram_matrix,
    pairwise_distances,
    signature,
)
from .graph import Graph, load_edge_list, save_edge_list, subgraph
from .hypotest import (
    BootstrapConfig,
    GeometryReport,
    GeometryTestResult,
    bootstrap_distance,
    classify,
    classify_from_pvalues,
    test_geometry,
    weyl_threshold,
)
from .pipeline import PipelineConfig, RunReport, run_batch, run_experiment, run_pipeline
from .simulate import LatentConfiguration, SimConfig, sample_graph, sample_latent, simulate

__all__ = [
    "__version__",
    "BootstrapConfig",
    "CliqueSelectionError",
    "CliqueSet",
    "CurvatureBracket",
    "CurvatureEstimate",
    "DistanceMatrix",
    "ENuHat",
    "EmbeddingCheck",
    "Geometry",
    "GeometryReport",
    "GeometryTestResult",
    "Graph",
    "LadleResult",
    "LatentConfiguration",
    "ManifoldSpec",
    "PipelineConfig",
    "ProbMatrix",
    "RunReport",
    "Signature",
    "SimConfig",
    "almost_clique",
    "bootstrap_distance",
    "classify",
    "classify_from_pvalues",
    "cosine_form",
    "curvature_bounds",
    "dimension_from_rank",
    "distances_from_graph",
    "eig_sym",
    "embeddable",
    "enumerate_cliques",
    "estimate_curvature",
    "estimate_d",
    "estimate_e_nu",
    "estimate_p",
    "geodesic_distance",
    "gram_matrix",
    "ladle_rank",
    "load_edge_list",
    "pairwise_distances",
    "run_batch",
    "run_experiment",
    "run_pipeline",
    "sample_graph",
    "sample_latent",
    "save_edge_list",
    "select_cliques",
    "signature",
    "simulate",
    "subgraph",
    "test_geometry",
    "weyl_threshold",
]
