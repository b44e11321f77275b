"""Dense linear-algebra primitives: orthonormal bases, principal angles,
subspace affinities, and seeded random sampling on spheres and Grassmannians.

Conventions used throughout the package:

* matrices are float64 numpy arrays, columns are the objects of interest
  (points or basis vectors);
* a subspace is represented by a matrix with orthonormal columns;
* numerical rank uses a relative singular-value threshold of 1e-10;
* randomness always flows through an explicit numpy Generator seeded with
  PCG64, so every result is reproducible from a single integer seed.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptyMatrix, InvalidDim, NonFinite

RANK_REL_TOL = 1e-10


# ---------------------------------------------------------------------------
# seeded randomness
# ---------------------------------------------------------------------------

def seeded_rng(seed: int) -> np.random.Generator:
    """Return the package-standard generator (PCG64) for an integer seed."""
    return np.random.Generator(np.random.PCG64(seed))


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Derive an independent child generator from ``seed`` and an index key.

    Uses numpy's SeedSequence spawn-key mechanism, so children for distinct
    keys are statistically independent and the mapping is stable: worker
    processes can draw their own streams in any order and still reproduce
    the single-threaded run exactly.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------

def as_matrix(A, name: str = "matrix", allow_empty_cols: bool = False) -> np.ndarray:
    """Validate and return ``A`` as a float64 2-d array.

    Raises EmptyMatrix for zero rows (or zero columns unless allowed) and
    NonFinite if any entry is NaN/inf.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise EmptyMatrix(f"{name} must be 2-d, got ndim={A.ndim}")
    if A.shape[0] == 0 or (A.shape[1] == 0 and not allow_empty_cols):
        raise EmptyMatrix(f"{name} has shape {A.shape}")
    if A.size and not np.isfinite(A).all():
        raise NonFinite(f"{name} contains non-finite entries")
    return A


def numerical_rank(singular_values: np.ndarray) -> int:
    """Rank given descending singular values, at the package tolerance."""
    sv = np.asarray(singular_values, dtype=float)
    if sv.size == 0 or sv[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sv > RANK_REL_TOL * sv[0]))


# ---------------------------------------------------------------------------
# factorizations
# ---------------------------------------------------------------------------

def thin_svd(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD of ``A``: returns (U, s, Vt) with ``A = U @ diag(s) @ Vt``.

    Singular values are descending; U and Vt.T have orthonormal columns.
    """
    A = as_matrix(A, "A")
    return np.linalg.svd(A, full_matrices=False)


def orthonormal_basis(A) -> np.ndarray:
    """Orthonormal basis for the column space of ``A`` (SVD-based).

    Returns an (M, r) matrix where r is the numerical rank of A; the result
    has exactly orthonormal columns and spans the same space as A. A zero
    matrix yields an (M, 0) basis. Column signs are fixed so the largest
    entry of each column is positive, which keeps canonical inputs (e.g.
    coordinate vectors) unchanged.
    """
    A = as_matrix(A, "A")
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    Q = np.ascontiguousarray(U[:, : numerical_rank(s)])
    for j in range(Q.shape[1]):
        lead = int(np.argmax(np.abs(Q[:, j])))
        if Q[lead, j] < 0:
            Q[:, j] = -Q[:, j]
    return Q


# ---------------------------------------------------------------------------
# principal angles and affinities
# ---------------------------------------------------------------------------

def _check_basis_pair(A, B):
    A = as_matrix(A, "first basis")
    B = as_matrix(B, "second basis")
    if A.shape[0] != B.shape[0]:
        raise DimensionMismatch(
            f"bases live in different ambient dimensions: {A.shape[0]} vs {B.shape[0]}"
        )
    return A, B


def principal_angle_cosines(A, B) -> np.ndarray:
    """Cosines of the principal angles between two subspaces.

    Both arguments must be orthonormal bases in the same ambient dimension.
    Returns min(dim A, dim B) values, descending, clamped to [0, 1].
    """
    A, B = _check_basis_pair(A, B)
    return np.clip(np.linalg.svd(A.T @ B, compute_uv=False), 0.0, 1.0)


def aff_inf(A, B) -> float:
    """Largest principal-angle cosine between two subspaces (worst-case affinity)."""
    return float(principal_angle_cosines(A, B)[0])


def aff_rms(A, B) -> float:
    """Root-mean-square affinity: sqrt(sum cos^2 theta_i / min(dim A, dim B))."""
    cos = principal_angle_cosines(A, B)
    return float(np.sqrt(np.sum(cos**2) / cos.size))


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------

def sample_unit_sphere(m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere in R^m (Gaussian direction)."""
    if m < 1:
        raise InvalidDim(f"sphere dimension must be >= 1, got {m}")
    while True:
        g = rng.standard_normal(m)
        norm = np.linalg.norm(g)
        if norm > 1e-12:
            return g / norm


def sample_grassmannian(M: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of a uniformly random d-dim subspace of R^M.

    Gaussian matrix followed by a QR factorization; invariant in
    distribution under left-multiplication by any fixed orthogonal matrix.
    ``d = 0`` returns an (M, 0) basis.
    """
    if M < 1:
        raise InvalidDim(f"ambient dimension must be >= 1, got {M}")
    if d < 0 or d > M:
        raise InvalidDim(f"subspace dimension must be in [0, {M}], got {d}")
    if d == 0:
        return np.zeros((M, 0))
    Q, _ = np.linalg.qr(rng.standard_normal((M, d)))
    return Q
