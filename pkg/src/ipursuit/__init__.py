"""Innovation pursuit subspace clustering.

Clusters unit-norm data points drawn from a union of subspaces by finding,
for each point, the sparsest-alignment direction in the data span (an L1
minimization), turning the resulting inner products into a sparse affinity
graph, and spectrally partitioning it. Includes the synthetic data models,
the closed-form guarantee evaluators, and an experiment CLI.
"""

from .datagen import (
    DataMatrix,
    SubspaceEnsemble,
    make_ensemble_deterministic,
    make_ensemble_fully_random,
    make_orthogonal_ensemble,
    sample_points,
    sample_points_deterministic,
)
from .linalg import (
    aff_inf,
    aff_rms,
    child_rng,
    orthonormal_basis,
    principal_angle_cosines,
    sample_grassmannian,
    sample_unit_sphere,
    seeded_rng,
    thin_svd,
)
from .lp import lp_oracle
from .pipeline import (
    AffinityGraph,
    ClusterAssignment,
    IPursuitResult,
    build_affinity,
    enhance,
    estimate_intersection_dim,
    ipursuit,
    kmeans_baseline,
    spectral_cluster,
    tsc_baseline,
)
from .solver import (
    BACKEND,
    DirectionSet,
    SolverConfig,
    all_directions,
    backend_name,
    innovation_direction,
)
from .theory import clustering_accuracy

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph",
    "BACKEND",
    "ClusterAssignment",
    "DataMatrix",
    "DirectionSet",
    "IPursuitResult",
    "SolverConfig",
    "SubspaceEnsemble",
    "aff_inf",
    "aff_rms",
    "all_directions",
    "backend_name",
    "build_affinity",
    "child_rng",
    "clustering_accuracy",
    "enhance",
    "estimate_intersection_dim",
    "innovation_direction",
    "ipursuit",
    "kmeans_baseline",
    "lp_oracle",
    "make_ensemble_deterministic",
    "make_ensemble_fully_random",
    "make_orthogonal_ensemble",
    "orthonormal_basis",
    "principal_angle_cosines",
    "sample_grassmannian",
    "sample_points",
    "sample_points_deterministic",
    "sample_unit_sphere",
    "seeded_rng",
    "spectral_cluster",
    "thin_svd",
    "tsc_baseline",
    "__version__",
]
