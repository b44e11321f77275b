"""Clustering pipeline: affinity construction, spectral partitioning, and the
optional spectrum-trimming enhancement for heavily intersecting subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .datagen import DataMatrix
from .errors import (
    DegeneratePoint,
    DomainError,
    InvalidK,
    IsolatedNode,
    RankTooLow,
    ShapeMismatch,
    TooFewValues,
)
from .solver import DirectionSet, SolverConfig, all_directions

_DEGREE_TOL = 1e-12


def _as_data(D) -> DataMatrix:
    """Accept a DataMatrix or any unit-column array-like."""
    return D if isinstance(D, DataMatrix) else DataMatrix(np.asarray(D, dtype=float))


@dataclass
class AffinityGraph:
    """Symmetric nonnegative affinity matrix with zero diagonal."""

    weights: np.ndarray
    sparsify_q: int

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ShapeMismatch(f"affinity must be square, got {W.shape}")
        if np.abs(W - W.T).max() > 1e-12:
            raise ShapeMismatch("affinity must be symmetric")
        if W.min() < 0:
            raise ShapeMismatch("affinity must be nonnegative")
        self.weights = W

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    n_clusters: int


@dataclass
class IPursuitResult:
    """Full pipeline output: labels, the graph they came from, diagnostics."""

    assignment: ClusterAssignment
    affinity: AffinityGraph
    directions: DirectionSet
    drop_dim: int  # leading singular directions removed before solving (0 = none)


def _sparsify_rows(W0: np.ndarray, q: int) -> np.ndarray:
    """Keep the q largest entries of each row (ties broken by lower index)."""
    N = W0.shape[0]
    out = np.zeros_like(W0)
    keep = min(q, N)
    for i in range(N):
        order = np.argsort(-W0[i], kind="stable")[:keep]
        out[i, order] = W0[i, order]
    return out


def build_affinity(directions, D, q: int = 3) -> AffinityGraph:
    """Affinity from innovation directions: W0 = |C^T D|, zero diagonal,
    top-q per row, then symmetrize as W0 + W0^T.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    C = directions.directions if isinstance(directions, DirectionSet) else np.asarray(directions, dtype=float)
    points = D.points if isinstance(D, DataMatrix) else np.asarray(D, dtype=float)
    if C.shape != points.shape:
        raise ShapeMismatch(
            f"directions {C.shape} do not match data {points.shape}"
        )
    W0 = np.abs(C.T @ points)
    np.fill_diagonal(W0, 0.0)
    W0 = _sparsify_rows(W0, q)
    return AffinityGraph(W0 + W0.T, q)


# ---------------------------------------------------------------------------
# k-means (hand-rolled for exact seeded reproducibility)
# ---------------------------------------------------------------------------

def _kmeans_pp_init(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(X, centers, max_iter, rtol):
    n, k = X.shape[0], centers.shape[0]
    prev_inertia = np.inf
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = X[mask].mean(axis=0)
            else:
                # deterministic restart: grab the point farthest from its center
                far = int(d2[np.arange(n), labels].argmax())
                centers[c] = X[far]
        if prev_inertia - inertia <= rtol * max(inertia, 1e-300):
            prev_inertia = inertia
            break
        prev_inertia = inertia
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, inertia


def kmeans(X, k, rng, n_init: int = 10, max_iter: int = 300, rtol: float = 1e-6):
    """Seeded k-means++ with restarts; returns (labels, inertia)."""
    X = np.asarray(X, dtype=float)
    if k < 1 or k > X.shape[0]:
        raise InvalidK(f"k={k} impossible for {X.shape[0]} points")
    best = (None, np.inf)
    for _ in range(n_init):
        centers = _kmeans_pp_init(X, k, rng)
        labels, inertia = _lloyd(X, centers.copy(), max_iter, rtol)
        if inertia < best[1]:
            best = (labels, inertia)
    return best


# ---------------------------------------------------------------------------
# spectral clustering
# ---------------------------------------------------------------------------

def spectral_cluster(graph, K: int, rng: np.random.Generator) -> ClusterAssignment:
    """Normalized spectral clustering of an affinity graph.

    Symmetric normalized Laplacian, K smallest eigenvectors, row
    normalization, then seeded k-means++ (10 restarts). Deterministic given
    the generator state.
    """
    W = graph.weights if isinstance(graph, AffinityGraph) else AffinityGraph(np.asarray(graph, dtype=float), 0).weights
    N = W.shape[0]
    if K < 1 or K > N:
        raise InvalidK(f"K={K} impossible for {N} nodes")
    degrees = W.sum(axis=1)
    lowest = int(np.argmin(degrees))
    if degrees[lowest] < _DEGREE_TOL:
        raise IsolatedNode(lowest)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    L = -W * inv_sqrt[:, None] * inv_sqrt[None, :]
    np.fill_diagonal(L, 1.0 + L.diagonal())
    _, vecs = scipy.linalg.eigh(L, subset_by_index=(0, K - 1))
    norms = np.linalg.norm(vecs, axis=1)
    norms[norms < 1e-300] = 1.0
    embedding = vecs / norms[:, None]
    labels, _ = kmeans(embedding, K, rng)
    return ClusterAssignment(labels, K)


# ---------------------------------------------------------------------------
# spectrum-trimming enhancement
# ---------------------------------------------------------------------------

def enhance(D: DataMatrix, n_drop: int) -> DataMatrix:
    """Project points off the ``n_drop`` leading left singular directions.

    Heavily shared energy concentrates in the top of the data spectrum;
    removing it and renormalizing makes each cluster's own component
    dominant again. Labels are carried over unchanged.
    """
    if n_drop < 0:
        raise DomainError(f"n_drop must be >= 0, got {n_drop}")
    if n_drop == 0:
        return DataMatrix(D.points.copy(), None if D.labels is None else D.labels.copy())
    U, s, _ = np.linalg.svd(D.points, full_matrices=False)
    rank = linalg.numerical_rank(s)
    if n_drop >= rank:
        raise RankTooLow(f"cannot drop {n_drop} directions from rank-{rank} data")
    tail = U[:, n_drop:rank]
    projected = tail @ (tail.T @ D.points)
    norms = np.linalg.norm(projected, axis=0)
    weakest = int(np.argmin(norms))
    if norms[weakest] < 1e-8:
        raise DegeneratePoint(weakest)
    return DataMatrix(projected / norms, None if D.labels is None else D.labels.copy())


def estimate_intersection_dim(
    singular_values, cap: int = 20, gap_threshold: float = 2.0
) -> int:
    """Estimate the shared-subspace dimension from the singular value gaps.

    Returns the index i (1-based, at most ``cap``) maximizing sigma_i /
    sigma_{i+1}, or 0 if no ratio reaches ``gap_threshold`` (no trim
    recommended). Expects at least two values.
    """
    sv = np.asarray(singular_values, dtype=float)
    if sv.size < 2:
        raise TooFewValues("need at least two singular values")
    limit = min(cap, sv.size - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = sv[:limit] / sv[1 : limit + 1]
    ratios = np.where(np.isnan(ratios), np.inf, ratios)
    best = int(np.argmax(ratios))
    if not (ratios[best] >= gap_threshold):
        return 0
    return best + 1


# ---------------------------------------------------------------------------
# end-to-end pipelines
# ---------------------------------------------------------------------------

def _resolve_drop_dim(D: DataMatrix, requested) -> int:
    if requested is None:
        return 0
    if requested == "auto":
        sv = np.linalg.svd(D.points, compute_uv=False)
        sv = sv[: linalg.numerical_rank(sv)]
        if sv.size < 2:
            return 0
        return estimate_intersection_dim(sv)
    return int(requested)


def ipursuit(
    D: DataMatrix,
    K: int,
    q: int = 3,
    config: SolverConfig | None = None,
    enhance_dim=None,
    rng: np.random.Generator | None = None,
) -> IPursuitResult:
    """Full innovation pursuit pipeline.

    ``enhance_dim`` is None (plain run), an explicit number of leading
    directions to drop, or "auto" to pick the drop from the singular value
    gap profile. ``rng`` drives only the k-means stage.
    """
    if rng is None:
        rng = linalg.seeded_rng(0)
    D = _as_data(D)
    drop = _resolve_drop_dim(D, enhance_dim)
    data = enhance(D, drop) if drop else D
    dirs = all_directions(data, config)
    graph = build_affinity(dirs, data, q)
    assignment = spectral_cluster(graph, K, rng)
    return IPursuitResult(assignment, graph, dirs, drop)


def tsc_baseline(
    D: DataMatrix, K: int, q: int = 3, rng: np.random.Generator | None = None
) -> ClusterAssignment:
    """Threshold-inner-product baseline: W0 = |D^T D| with the same
    sparsify/symmetrize/spectral tail as the main pipeline.
    """
    if rng is None:
        rng = linalg.seeded_rng(0)
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    D = _as_data(D)
    W0 = np.abs(D.points.T @ D.points)
    np.fill_diagonal(W0, 0.0)
    W0 = _sparsify_rows(W0, q)
    graph = AffinityGraph(W0 + W0.T, q)
    return spectral_cluster(graph, K, rng)


def kmeans_baseline(
    D: DataMatrix, K: int, rng: np.random.Generator | None = None
) -> ClusterAssignment:
    """Plain k-means on the raw coordinates (points as rows)."""
    if rng is None:
        rng = linalg.seeded_rng(0)
    D = _as_data(D)
    labels, _ = kmeans(D.points.T, K, rng)
    return ClusterAssignment(labels, K)
