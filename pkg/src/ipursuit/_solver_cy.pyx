# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ADMM kernel for the innovation direction problem.

Same algorithm as ``_solver_py.solve_column``; the iteration loop runs in C
with direct BLAS calls, which removes the per-iteration Python overhead that
dominates at these matrix sizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_blas cimport dgemv, dtrsv, ddot, dnrm2

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline void _gemv_bv(double* B, int r, int N, double* x, double* out) nogil:
    # out(r) = B(r,N) @ x(N); B is C-ordered, i.e. Fortran-order (N, r) transposed
    cdef char trans = b'T'
    cdef int inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv(&trans, &N, &r, &one, B, &N, x, &inc, &zero, out, &inc)


cdef inline void _gemv_btc(double* B, int r, int N, double* x, double* out) nogil:
    # out(N) = B.T(N,r) @ x(r)
    cdef char trans = b'N'
    cdef int inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv(&trans, &N, &r, &one, B, &N, x, &inc, &zero, out, &inc)


cdef inline void _cho_solve(double* L, int r, double* x) nogil:
    # solve (L L^T) x = x in place; L is C-ordered lower triangular, which is
    # an upper triangular matrix in Fortran order
    cdef char uplo = b'U'
    cdef char trans_t = b'T'
    cdef char trans_n = b'N'
    cdef char diag = b'N'
    cdef int inc = 1
    dtrsv(&uplo, &trans_t, &diag, &r, L, &r, x, &inc)
    dtrsv(&uplo, &trans_n, &diag, &r, L, &r, x, &inc)


def solve_column(double[:, ::1] B, double[:, ::1] L, double[::1] bcol,
                 double[::1] w, double beta, double rho,
                 double eps_pri, double eps_dual, int max_iters):
    """See ``_solver_py.solve_column`` for the contract."""
    cdef int r = B.shape[0]
    cdef int N = B.shape[1]
    cdef int inc = 1

    chat_arr = np.array(bcol, dtype=np.float64, copy=True)
    cdef double[::1] chat = chat_arr
    cdef cnp.ndarray z_arr = np.empty(N, dtype=np.float64)
    cdef cnp.ndarray u_arr = np.zeros(N, dtype=np.float64)
    cdef cnp.ndarray Bc_arr = np.empty(N, dtype=np.float64)
    cdef cnp.ndarray y_arr = np.empty(r, dtype=np.float64)
    cdef cnp.ndarray v_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] z = z_arr
    cdef double[::1] u = u_arr
    cdef double[::1] Bc = Bc_arr
    cdef double[::1] y = y_arr
    cdef double[::1] v = v_arr

    cdef double thresh = 1.0 / rho
    cdef double mu, r_pri, s_dual, xj, zj, d
    cdef int it = 0, j
    cdef bint converged = 0

    with nogil:
        _gemv_btc(&B[0, 0], r, N, &chat[0], &z[0])
        while it < max_iters:
            it += 1
            for j in range(N):
                v[j] = z[j] - u[j]
            _gemv_bv(&B[0, 0], r, N, &v[0], &y[0])
            _cho_solve(&L[0, 0], r, &y[0])
            mu = (ddot(&r, &bcol[0], &inc, &y[0], &inc) - 1.0) / beta
            for j in range(r):
                chat[j] = y[j] - mu * w[j]
            _gemv_btc(&B[0, 0], r, N, &chat[0], &Bc[0])
            r_pri = 0.0
            for j in range(N):
                xj = Bc[j] + u[j]
                if xj > thresh:
                    zj = xj - thresh
                elif xj < -thresh:
                    zj = xj + thresh
                else:
                    zj = 0.0
                d = Bc[j] - zj
                u[j] += d
                r_pri += d * d
                v[j] = zj - z[j]  # z difference for the dual residual
                z[j] = zj
            if sqrt(r_pri) <= eps_pri:
                _gemv_bv(&B[0, 0], r, N, &v[0], &y[0])
                s_dual = rho * dnrm2(&r, &y[0], &inc)
                if s_dual <= eps_dual:
                    converged = 1
                    break

    return chat_arr, it, bool(converged)
