"""Synthetic union-of-subspaces data with a controlled shared intersection.

Each cluster k inhabits the subspace spanned by ``[U, Uhat_k]`` where U is a
common intersection basis (dimension s) and Uhat_k is the cluster's own
innovation basis, orthogonal to U. Points are unit vectors drawn by placing
uniform sphere coefficients on the cluster basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    EmptyMatrix,
    InvalidDims,
    LengthMismatch,
    NonFinite,
    NotOrthogonal,
    RankDeficient,
    ZeroCoefficient,
)

_ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class SubspaceEnsemble:
    """A union of K subspaces sharing one intersection subspace.

    Attributes
    ----------
    intersection : (M, s) array
        Orthonormal basis of the shared intersection (s may be 0).
    innovations : tuple of (M, d_k) arrays
        Per-cluster orthonormal innovation bases, each orthogonal to the
        intersection. Innovations of different clusters need not be
        orthogonal to each other.
    """

    intersection: np.ndarray
    innovations: tuple

    @property
    def ambient_dim(self) -> int:
        return self.intersection.shape[0]

    @property
    def intersection_dim(self) -> int:
        return self.intersection.shape[1]

    @property
    def n_clusters(self) -> int:
        return len(self.innovations)

    @property
    def cluster_dims(self) -> tuple:
        s = self.intersection_dim
        return tuple(s + V.shape[1] for V in self.innovations)

    def cluster_basis(self, k: int) -> np.ndarray:
        """Orthonormal basis [U, Uhat_k] of cluster k's subspace."""
        return np.hstack([self.intersection, self.innovations[k]])

    def rest_basis(self, k: int) -> np.ndarray:
        """Orthonormal basis of the union of all clusters except k."""
        blocks = [self.intersection] + [
            V for j, V in enumerate(self.innovations) if j != k
        ]
        stacked = np.hstack(blocks)
        if stacked.shape[1] == 0:
            return stacked
        return linalg.orthonormal_basis(stacked)

    def rest_innovation_basis(self, k: int) -> np.ndarray:
        """Orthonormal basis of the joint innovation span excluding cluster k."""
        blocks = [V for j, V in enumerate(self.innovations) if j != k]
        if not blocks:
            return np.zeros((self.ambient_dim, 0))
        stacked = np.hstack(blocks)
        if stacked.shape[1] == 0:
            return stacked
        return linalg.orthonormal_basis(stacked)

    def joint_innovation_basis(self) -> np.ndarray:
        """Orthonormal basis of span(Uhat_1) + ... + span(Uhat_K)."""
        stacked = np.hstack(list(self.innovations))
        if stacked.shape[1] == 0:
            return np.zeros((self.ambient_dim, 0))
        return linalg.orthonormal_basis(stacked)

    def validate(self, tol: float = 1e-10) -> None:
        """Assert the orthonormality invariants (used by tests)."""
        U = self.intersection
        if U.shape[1]:
            err = np.abs(U.T @ U - np.eye(U.shape[1])).max()
            if err > tol:
                raise NotOrthogonal(f"intersection basis off by {err:.2e}")
        for k, V in enumerate(self.innovations):
            if V.shape[0] != self.ambient_dim:
                raise InvalidDims(f"innovation {k} ambient dim mismatch")
            if V.shape[1] == 0:
                continue
            err = np.abs(V.T @ V - np.eye(V.shape[1])).max()
            if err > tol:
                raise NotOrthogonal(f"innovation basis {k} off by {err:.2e}")
            if U.shape[1]:
                cross = np.abs(U.T @ V).max()
                if cross > tol:
                    raise NotOrthogonal(
                        f"innovation {k} overlaps the intersection by {cross:.2e}"
                    )


@dataclass
class DataMatrix:
    """Unit-norm data points stored as columns, with optional integer labels."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.points = linalg.as_matrix(self.points, "points")
        norms = np.linalg.norm(self.points, axis=0)
        off = np.abs(norms - 1.0).max()
        if off > 1e-8:
            raise ZeroCoefficient(
                f"data columns must be unit norm (worst deviation {off:.2e})"
            )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.points.shape[1],):
                raise LengthMismatch(
                    f"labels length {self.labels.shape} does not match "
                    f"{self.points.shape[1]} points"
                )

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[0]

    @property
    def n_points(self) -> int:
        return self.points.shape[1]


# ---------------------------------------------------------------------------
# ensemble constructors
# ---------------------------------------------------------------------------

def make_ensemble_fully_random(
    M: int, K: int, m: int, s: int, rng: np.random.Generator
) -> SubspaceEnsemble:
    """Fully random model: uniform intersection, uniform innovations in its
    orthogonal complement.

    Requires 0 <= s < m <= M, K >= 1, and K*(m-s) + s <= M so the innovation
    spans can be simultaneously independent.
    """
    if K < 1:
        raise InvalidDims(f"need at least one cluster, got K={K}")
    if not (0 <= s < m <= M):
        raise InvalidDims(f"need 0 <= s < m <= M, got s={s}, m={m}, M={M}")
    if K * (m - s) + s > M:
        raise InvalidDims(
            f"K*(m-s)+s = {K * (m - s) + s} exceeds the ambient dimension {M}"
        )
    U = linalg.sample_grassmannian(M, s, rng)
    innovations = []
    for _ in range(K):
        G = rng.standard_normal((M, m - s))
        if s:
            G -= U @ (U.T @ G)
        Q = linalg.orthonormal_basis(G)
        if Q.shape[1] != m - s:
            raise RankDeficient("random innovation draw lost rank")
        innovations.append(Q)
    return SubspaceEnsemble(U, tuple(innovations))


def make_ensemble_deterministic(U, innovations) -> SubspaceEnsemble:
    """Build an ensemble from user-supplied bases.

    Inputs are orthonormalized; each innovation must already be (numerically)
    orthogonal to span(U) — overlap beyond 1e-8 raises NotOrthogonal. After the
    check the innovations are projected onto the exact orthogonal complement
    of U so the stored ensemble satisfies the orthogonality invariants to
    machine precision. RankDeficient if orthonormalization loses a dimension.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] == 0:
        raise EmptyMatrix(f"intersection basis has shape {U.shape}")
    if not np.isfinite(U).all():
        raise NonFinite("intersection basis contains non-finite entries")
    M = U.shape[0]
    if U.shape[1]:
        U_on = linalg.orthonormal_basis(U)
        if U_on.shape[1] != U.shape[1]:
            raise RankDeficient("intersection basis is rank deficient")
    else:
        U_on = np.zeros((M, 0))

    cleaned = []
    for k, V in enumerate(innovations):
        V = linalg.as_matrix(V, f"innovation {k}")
        if V.shape[0] != M:
            raise InvalidDims(
                f"innovation {k} ambient dim {V.shape[0]} != {M}"
            )
        V_on = linalg.orthonormal_basis(V)
        if V_on.shape[1] != V.shape[1]:
            raise RankDeficient(f"innovation basis {k} is rank deficient")
        if U_on.shape[1]:
            overlap = np.abs(U_on.T @ V_on).max()
            if overlap > _ORTHO_TOL:
                raise NotOrthogonal(
                    f"innovation {k} overlaps the intersection by {overlap:.2e}"
                )
            V_on = V_on - U_on @ (U_on.T @ V_on)
            V_on = linalg.orthonormal_basis(V_on)
            if V_on.shape[1] != V.shape[1]:
                raise RankDeficient(
                    f"innovation {k} collapsed when projected off the intersection"
                )
        cleaned.append(V_on)
    if not cleaned:
        raise InvalidDims("need at least one innovation basis")
    return SubspaceEnsemble(U_on, tuple(cleaned))


def make_orthogonal_ensemble(
    M: int, K: int, d: int, rng: np.random.Generator
) -> SubspaceEnsemble:
    """K mutually orthogonal d-dim subspaces (no intersection), randomly rotated.

    Convenience for the disjoint regime: one uniform (M, K*d) frame split
    into K blocks, so pairwise affinities are exactly zero.
    """
    if K * d > M:
        raise InvalidDims(f"K*d = {K * d} exceeds the ambient dimension {M}")
    frame = linalg.sample_grassmannian(M, K * d, rng)
    blocks = tuple(np.ascontiguousarray(frame[:, k * d : (k + 1) * d]) for k in range(K))
    return SubspaceEnsemble(np.zeros((M, 0)), blocks)


# ---------------------------------------------------------------------------
# point sampling
# ---------------------------------------------------------------------------

def _per_cluster_counts(ens: SubspaceEnsemble, n_per_cluster) -> list:
    if np.isscalar(n_per_cluster):
        counts = [int(n_per_cluster)] * ens.n_clusters
    else:
        counts = [int(n) for n in n_per_cluster]
        if len(counts) != ens.n_clusters:
            raise LengthMismatch(
                f"{len(counts)} cluster sizes for {ens.n_clusters} clusters"
            )
    if any(n < 1 for n in counts):
        raise InvalidDims("every cluster needs at least one point")
    return counts


def sample_points(
    ens: SubspaceEnsemble, n_per_cluster, rng: np.random.Generator
) -> DataMatrix:
    """Sample unit-norm points: uniform sphere coefficients on each cluster basis.

    ``n_per_cluster`` is an int (same count everywhere) or a length-K
    sequence. Points are grouped by cluster and labeled 0..K-1.
    """
    counts = _per_cluster_counts(ens, n_per_cluster)
    cols = []
    labels = []
    for k, n in enumerate(counts):
        B = ens.cluster_basis(k)
        m_k = B.shape[1]
        coeff = np.empty((m_k, n))
        for j in range(n):
            coeff[:, j] = linalg.sample_unit_sphere(m_k, rng)
        cols.append(B @ coeff)
        labels.extend([k] * n)
    return DataMatrix(np.hstack(cols), np.asarray(labels, dtype=int))


def sample_points_deterministic(ens: SubspaceEnsemble, coefficients) -> DataMatrix:
    """Place points at explicit coefficients on each cluster basis.

    ``coefficients`` is a length-K sequence of (m_k, n_k) arrays. Columns are
    normalized; a zero column raises ZeroCoefficient.
    """
    if len(coefficients) != ens.n_clusters:
        raise LengthMismatch(
            f"{len(coefficients)} coefficient blocks for {ens.n_clusters} clusters"
        )
    cols = []
    labels = []
    for k, block in enumerate(coefficients):
        block = linalg.as_matrix(block, f"coefficients for cluster {k}")
        m_k = ens.cluster_dims[k]
        if block.shape[0] != m_k:
            raise InvalidDims(
                f"cluster {k} coefficients have {block.shape[0]} rows, need {m_k}"
            )
        norms = np.linalg.norm(block, axis=0)
        if (norms < 1e-12).any():
            bad = int(np.argmin(norms))
            raise ZeroCoefficient(f"coefficient column {bad} of cluster {k} is zero")
        cols.append(ens.cluster_basis(k) @ (block / norms))
        labels.extend([k] * block.shape[1])
    return DataMatrix(np.hstack(cols), np.asarray(labels, dtype=int))
