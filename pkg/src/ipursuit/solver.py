"""Innovation direction solver.

For a unit-norm data matrix D and a column index i, the optimal direction of
innovation is

    c* = argmin ||D^T c||_1   subject to   c^T d_i = 1.

The solver is ADMM on the split z = D^T c: the z update is entrywise soft
thresholding, the c update is an equality-constrained least-squares solve
against a factorization computed once per matrix. By default c is
parameterized inside span(D) via the left singular vectors, which makes the
least-squares system diagonal and keeps the returned direction in the span.

Two interchangeable kernels implement the inner loop: a Cython/BLAS one and
a pure-numpy fallback. Selection happens at import, overridable with the
``IPURSUIT_SOLVER_BACKEND`` environment variable (auto|python|compiled).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .datagen import DataMatrix
from .errors import DomainError, IndexOutOfRange, RankDeficient

try:
    from . import _solver_cy as _compiled
except ImportError:  # extension not built; numpy fallback still works
    _compiled = None
from . import _solver_py as _python


def _select_kernel():
    choice = os.environ.get("IPURSUIT_SOLVER_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return _compiled if _compiled is not None else _python
    if choice == "python":
        return _python
    if choice in ("compiled", "cython"):
        if _compiled is None:
            raise ImportError(
                "IPURSUIT_SOLVER_BACKEND=compiled but the extension is not built"
            )
        return _compiled
    raise ValueError(f"unknown solver backend {choice!r}")


_kernel = _select_kernel()
BACKEND = _kernel.BACKEND_NAME


def backend_name() -> str:
    """Name of the active inner-loop kernel ("compiled" or "python")."""
    return _kernel.BACKEND_NAME


@dataclass(frozen=True)
class SolverConfig:
    """ADMM knobs. The penalty is fixed (no adaptive rho) for determinism."""

    rho: float = 1.0
    primal_tol: float = 1e-7
    dual_tol: float = 1e-7
    max_iters: int = 20000
    reduce_to_span: bool = True

    def __post_init__(self):
        if not (self.rho > 0 and self.primal_tol > 0 and self.dual_tol > 0):
            raise DomainError("rho and tolerances must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")


@dataclass
class DirectionSet:
    """Optimal directions for every column, with per-column diagnostics."""

    directions: np.ndarray  # (M, N), column j solves the problem for point j
    objectives: np.ndarray  # (N,) final L1 objective values
    converged: np.ndarray  # (N,) bool, residual test passed before the cap
    iterations: np.ndarray  # (N,) ADMM iterations used

    @property
    def n_points(self) -> int:
        return self.directions.shape[1]


class _Precomp:
    """Shared per-matrix factorizations for the column solves."""

    __slots__ = ("points", "X", "B", "L", "W", "beta", "eps_pri", "eps_dual", "config")

    def __init__(self, points: np.ndarray, config: SolverConfig):
        M, N = points.shape
        self.points = points
        self.config = config
        if config.reduce_to_span:
            U, s, Vt = np.linalg.svd(points, full_matrices=False)
            r = linalg.numerical_rank(s)
            self.X = np.ascontiguousarray(U[:, :r])
            self.B = np.ascontiguousarray(s[:r, None] * Vt[:r])
            # B B^T is exactly diag(s^2) for this parameterization
            self.L = np.ascontiguousarray(np.diag(s[:r]))
            self.W = np.ascontiguousarray(Vt[:r] / s[:r, None])
        else:
            self.X = None
            self.B = np.ascontiguousarray(points)
            G = self.B @ self.B.T
            try:
                self.L = np.linalg.cholesky(G)
            except np.linalg.LinAlgError as exc:
                raise RankDeficient(
                    "data does not have full row rank; use reduce_to_span=True"
                ) from exc
            W = solve_triangular(self.L, self.B, lower=True, check_finite=False)
            self.W = np.ascontiguousarray(
                solve_triangular(self.L.T, W, lower=False, check_finite=False)
            )
        self.beta = np.einsum("ij,ij->j", self.B, self.W)
        self.eps_pri = config.primal_tol * np.sqrt(N)
        self.eps_dual = config.dual_tol * np.sqrt(N)

    def solve(self, i: int):
        bcol = np.ascontiguousarray(self.B[:, i])
        wcol = np.ascontiguousarray(self.W[:, i])
        chat, iters, converged = _kernel.solve_column(
            self.B,
            self.L,
            bcol,
            wcol,
            float(self.beta[i]),
            self.config.rho,
            self.eps_pri,
            self.eps_dual,
            self.config.max_iters,
        )
        c = self.X @ chat if self.X is not None else chat
        objective = float(np.abs(self.points.T @ c).sum())
        return c, objective, iters, converged


def _as_points(D) -> np.ndarray:
    if isinstance(D, DataMatrix):
        return D.points
    return DataMatrix(D).points  # validates shape, finiteness, unit columns


def innovation_direction(D, i: int, config: SolverConfig | None = None):
    """Solve the innovation problem for column ``i``.

    Returns (c, objective, converged); c has unit inner product with d_i and,
    with the default configuration, lies in span(D).
    """
    points = _as_points(D)
    if not (0 <= i < points.shape[1]):
        raise IndexOutOfRange(f"column index {i} outside [0, {points.shape[1]})")
    pre = _Precomp(points, config or SolverConfig())
    c, objective, _, converged = pre.solve(i)
    return c, objective, converged


def all_directions(D, config: SolverConfig | None = None) -> DirectionSet:
    """Solve the innovation problem for every column of ``D``.

    Columns are independent; the factorizations are shared, so column j of
    the result is bit-identical to a standalone ``innovation_direction(D, j)``
    call with the same configuration and backend.
    """
    points = _as_points(D)
    M, N = points.shape
    pre = _Precomp(points, config or SolverConfig())
    directions = np.empty((M, N))
    objectives = np.empty(N)
    iterations = np.empty(N, dtype=int)
    converged = np.empty(N, dtype=bool)
    for j in range(N):
        c, obj, iters, ok = pre.solve(j)
        directions[:, j] = c
        objectives[j] = obj
        iterations[j] = iters
        converged[j] = ok
    return DirectionSet(directions, objectives, converged, iterations)
