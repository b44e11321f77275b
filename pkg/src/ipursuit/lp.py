"""Exact linear-programming reference for the innovation direction problem.

The L1 direction search

    minimize ||D^T c||_1   subject to   d_i^T c = 1

is recast as the standard-form LP

    minimize sum(u) + sum(v)
    subject to  D^T c - u + v = 0,  d_i^T c = 1,  u, v >= 0,

with the free vector c split into positive and negative parts, and solved by
a dense two-phase primal simplex. This is the slow-but-exact cross-check for
the iterative solver, so problem sizes are guarded.
"""

from __future__ import annotations

import numpy as np

from .datagen import DataMatrix
from .errors import IndexOutOfRange, TooLarge

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_MAX_ITERS = 20000

MAX_POINTS = 200
MAX_AMBIENT = 50


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run_simplex(T, basis, cost, active_cols):
    """Drive the tableau to optimality for ``cost`` over ``active_cols``.

    T is (m, n+1) with the rhs in the last column; basis maps rows to basic
    column indices. Dantzig pricing with a permanent switch to Bland's rule
    after a stall, which guarantees termination.
    """
    m = T.shape[0]
    stall = 0
    bland = False
    last_obj = None
    for _ in range(_MAX_ITERS):
        cb = cost[basis]
        # reduced costs: c_j - c_B^T (B^-1 A_j); T already holds B^-1 A
        reduced = cost[active_cols] - cb @ T[:, active_cols]
        if bland:
            negative = np.nonzero(reduced < -_COST_TOL)[0]
            if negative.size == 0:
                return True
            col = active_cols[negative[0]]
        else:
            j = int(np.argmin(reduced))
            if reduced[j] >= -_COST_TOL:
                return True
            col = active_cols[j]
        ratios = np.full(m, np.inf)
        positive = T[:, col] > _PIVOT_TOL
        ratios[positive] = T[positive, -1] / T[positive, col]
        row = int(np.argmin(ratios))
        if not np.isfinite(ratios[row]):
            return False  # unbounded (cannot happen for our objective)
        # ties: prefer kicking out the largest column index (artificials first)
        tied = np.nonzero(np.abs(ratios - ratios[row]) <= 1e-12)[0]
        if tied.size > 1:
            row = int(tied[np.argmax(basis[tied])])
        _pivot(T, basis, row, col)
        obj = float(cost[basis] @ T[:, -1])
        if last_obj is not None and obj >= last_obj - 1e-12:
            stall += 1
            if stall > 50:
                bland = True
        else:
            stall = 0
        last_obj = obj
    raise RuntimeError("simplex did not terminate within the iteration cap")


def simplex_solve(cost, A_eq, b_eq):
    """Solve min cost@x s.t. A_eq x = b_eq, x >= 0 by a two-phase simplex.

    Returns (x, objective, status) with status in
    {"optimal", "infeasible", "unbounded"}.
    """
    A = np.asarray(A_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float).copy()
    cost = np.asarray(cost, dtype=float)
    m, n = A.shape
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial basis
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = np.arange(n, n + m)
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    cols = np.arange(n + m)
    _run_simplex(T, basis, phase1_cost, cols)
    if float(phase1_cost[basis] @ T[:, -1]) > 1e-7:
        return np.zeros(n), np.inf, "infeasible"

    # drive leftover artificials out of the basis (or drop redundant rows)
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n:
            pivots = np.nonzero(np.abs(T[r, :n]) > _PIVOT_TOL)[0]
            if pivots.size:
                _pivot(T, basis, r, int(pivots[0]))
            else:
                keep[r] = False
    T = T[keep]
    basis = basis[keep]

    # phase 2 on the original columns only
    T = np.hstack([T[:, :n], T[:, -1:]])
    phase2_cost = cost
    ok = _run_simplex(T, basis, phase2_cost, np.arange(n))
    if not ok:
        return np.zeros(n), -np.inf, "unbounded"
    x = np.zeros(n)
    x[basis] = T[:, -1]
    return x, float(cost @ x), "optimal"


def lp_oracle(D, i: int) -> tuple[np.ndarray, float]:
    """Globally optimal innovation direction for column ``i`` of ``D``.

    Returns (c, objective). Guarded to small instances (N <= 200, M <= 50):
    this routine exists to certify the iterative solver, not to scale.
    """
    points = D.points if isinstance(D, DataMatrix) else np.asarray(D, dtype=float)
    M, N = points.shape
    if N > MAX_POINTS or M > MAX_AMBIENT:
        raise TooLarge(
            f"lp_oracle is limited to N <= {MAX_POINTS}, M <= {MAX_AMBIENT}; "
            f"got N={N}, M={M}"
        )
    if not (0 <= i < N):
        raise IndexOutOfRange(f"column index {i} outside [0, {N})")

    Dt = points.T  # (N, M)
    d_i = points[:, i]
    # variables: [c_pos (M), c_neg (M), u (N), v (N)]
    A = np.zeros((N + 1, 2 * M + 2 * N))
    A[:N, :M] = Dt
    A[:N, M : 2 * M] = -Dt
    A[:N, 2 * M : 2 * M + N] = -np.eye(N)
    A[:N, 2 * M + N :] = np.eye(N)
    A[N, :M] = d_i
    A[N, M : 2 * M] = -d_i
    b = np.zeros(N + 1)
    b[N] = 1.0
    cost = np.concatenate([np.zeros(2 * M), np.ones(2 * N)])

    x, obj, status = simplex_solve(cost, A, b)
    if status != "optimal":
        raise RuntimeError(f"simplex returned status {status!r} on a feasible LP")
    c = x[:M] - x[M : 2 * M]
    return c, obj
