"""Pure-numpy ADMM kernel for the innovation direction problem.

This is the fallback implementation of the per-column inner loop; the
compiled twin lives in ``_solver_cy.pyx``. Both expose the same
``solve_column`` signature and are selected in ``solver``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

BACKEND_NAME = "python"


def solve_column(B, L, bcol, w, beta, rho, eps_pri, eps_dual, max_iters):
    """ADMM for min ||B^T chat||_1 s.t. bcol^T chat = 1.

    Parameters
    ----------
    B : (r, N) reduced data matrix (rows span the data).
    L : (r, r) lower Cholesky factor of B @ B.T.
    bcol : (r,) column of B the constraint pins (the target point).
    w : (r,) precomputed solution of (B B^T) w = bcol.
    beta : float, bcol @ w (positive).
    rho : augmented penalty; the shrinkage threshold is 1/rho.
    eps_pri, eps_dual : absolute residual thresholds (already scaled).
    max_iters : iteration cap.

    Returns
    -------
    (chat, n_iters, converged)
    """
    chat = bcol.copy()
    z = B.T @ chat
    u = np.zeros_like(z)
    thresh = 1.0 / rho
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        # constrained least-squares step: G chat = B(z - u) - mu*bcol
        y = B @ (z - u)
        t = solve_triangular(L, y, lower=True, check_finite=False)
        t = solve_triangular(L.T, t, lower=False, check_finite=False)
        mu = (bcol @ t - 1.0) / beta
        chat = t - mu * w
        Bc = B.T @ chat
        # shrinkage step and dual ascent
        x = Bc + u
        z_new = np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)
        diff = Bc - z_new
        u += diff
        r_pri = np.linalg.norm(diff)
        if r_pri <= eps_pri:
            s_dual = rho * np.linalg.norm(B @ (z_new - z))
            if s_dual <= eps_dual:
                z = z_new
                converged = True
                break
        z = z_new
    return chat, it, converged
