# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of :mod:`ere4.kernels._pure`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cosl, fabsl, sqrt

cnp.import_array()


cdef int _lu_solve(long double[:, ::1] M, long double[:, ::1] R) noexcept nogil:
    """In-place Gaussian elimination with partial pivoting; R <- M^{-1} R."""
    cdef Py_ssize_t N = M.shape[0], nr = R.shape[1]
    cdef Py_ssize_t i, j, k, p
    cdef long double amax, v, f, tmp
    for k in range(N):
        p = k
        amax = fabsl(M[k, k])
        for i in range(k + 1, N):
            v = fabsl(M[i, k])
            if v > amax:
                amax = v
                p = i
        if amax == 0.0:
            return -1
        if p != k:
            for j in range(N):
                tmp = M[k, j]; M[k, j] = M[p, j]; M[p, j] = tmp
            for j in range(nr):
                tmp = R[k, j]; R[k, j] = R[p, j]; R[p, j] = tmp
        for i in range(k + 1, N):
            f = M[i, k] / M[k, k]
            if f != 0.0:
                for j in range(k + 1, N):
                    M[i, j] -= f * M[k, j]
                for j in range(nr):
                    R[i, j] -= f * R[k, j]
    for k in range(N - 1, -1, -1):
        for j in range(nr):
            v = R[k, j]
            for i in range(k + 1, N):
                v -= M[k, i] * R[i, j]
            R[k, j] = v / M[k, k]
    return 0


def gauss_propagate(A0, A1, double e, double t0, double t1, Py_ssize_t nsteps, a, b, c):
    """Gauss-Legendre propagation with stage solves and products in long double.

    Returns the long double matrix.
    """
    cdef const long double[:, ::1] a0 = np.ascontiguousarray(A0, dtype=np.longdouble)
    cdef const long double[:, ::1] a1 = np.ascontiguousarray(A1, dtype=np.longdouble)
    cdef long double[:, ::1] ta = np.ascontiguousarray(a, dtype=np.longdouble)
    cdef long double[::1] tb = np.ascontiguousarray(b, dtype=np.longdouble)
    cdef long double[::1] tc = np.ascontiguousarray(c, dtype=np.longdouble)
    cdef Py_ssize_t n = a0.shape[0], s = tb.shape[0], N = s * n
    cdef Py_ssize_t i, j, k, r, q, col
    cdef long double h, t, sc, v, le = e, lt0 = t0, lt1 = t1
    cdef int status = 0
    X_arr = np.eye(n, dtype=np.longdouble)
    cdef long double[:, ::1] X = X_arr
    if nsteps <= 0:
        return X_arr
    cdef long double[:, :, ::1] L = np.empty((s, n, n), dtype=np.longdouble)
    cdef long double[:, ::1] big = np.empty((N, N), dtype=np.longdouble)
    cdef long double[:, ::1] rhs = np.empty((N, n), dtype=np.longdouble)
    cdef long double[:, ::1] Rm = np.empty((n, n), dtype=np.longdouble)
    cdef long double[:, ::1] Y = np.empty((n, n), dtype=np.longdouble)
    h = (lt1 - lt0) / nsteps
    with nogil:
        for k in range(nsteps):
            t = lt0 + (lt1 - lt0) * k / nsteps
            for i in range(s):
                sc = 1.0 / (1.0 + le * cosl(t + tc[i] * h))
                for r in range(n):
                    for q in range(n):
                        L[i, r, q] = a0[r, q] + a1[r, q] * sc
            for i in range(s):
                for r in range(n):
                    for j in range(s):
                        for q in range(n):
                            big[i * n + r, j * n + q] = -(h * ta[i, j]) * L[i, r, q]
                    big[i * n + r, i * n + r] += 1.0
                    for q in range(n):
                        rhs[i * n + r, q] = L[i, r, q]
            status = _lu_solve(big, rhs)
            if status != 0:
                break
            for r in range(n):
                for q in range(n):
                    v = 0.0
                    for i in range(s):
                        v += (h * tb[i]) * rhs[i * n + r, q]
                    Rm[r, q] = v
                Rm[r, r] += 1.0
            for r in range(n):
                for col in range(n):
                    v = 0.0
                    for q in range(n):
                        v += Rm[r, q] * X[q, col]
                    Y[r, col] = v
            for r in range(n):
                for col in range(n):
                    X[r, col] = Y[r, col]
    if status != 0:
        raise ZeroDivisionError("singular Gauss-Legendre stage system")
    return X_arr


def nbody_accel(q, masses):
    cdef const double[:, ::1] Q = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] m = np.ascontiguousarray(masses, dtype=np.float64)
    cdef Py_ssize_t n = Q.shape[0], i, j
    out = np.zeros((n, 2))
    cdef double[:, ::1] acc = out
    cdef double dx, dy, r2, inv3
    for i in range(n):
        for j in range(i + 1, n):
            dx = Q[j, 0] - Q[i, 0]
            dy = Q[j, 1] - Q[i, 1]
            r2 = dx * dx + dy * dy
            inv3 = 1.0 / (r2 * sqrt(r2))
            acc[i, 0] += m[j] * dx * inv3
            acc[i, 1] += m[j] * dy * inv3
            acc[j, 0] -= m[i] * dx * inv3
            acc[j, 1] -= m[i] * dy * inv3
    return out
