"""Numpy implementations of the hot loops; reference for the compiled twin."""

from __future__ import annotations

import math

import numpy as np


def _solve_extended(M, R):
    """Gaussian elimination with partial pivoting in long double (numpy's
    LAPACK bindings stop at float64)."""
    M = M.copy()
    R = R.copy()
    n = M.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if M[p, k] == 0:
            raise ZeroDivisionError("singular Gauss-Legendre stage system")
        if p != k:
            M[[k, p]] = M[[p, k]]
            R[[k, p]] = R[[p, k]]
        f = M[k + 1 :, k] / M[k, k]
        M[k + 1 :, k:] -= np.outer(f, M[k, k:])
        R[k + 1 :] -= np.outer(f, R[k])
    for k in range(n - 1, -1, -1):
        R[k] = (R[k] - M[k, k + 1 :] @ R[k + 1 :]) / M[k, k]
    return R


def gauss_propagate(A0, A1, e, t0, t1, nsteps, a, b, c):
    """Fundamental matrix of X' = (A0 + A1/(1 + e cos t)) X on a uniform grid.

    One implicit Gauss-Legendre collocation step per grid cell with the
    Butcher tableau (a, b, c); X(t0) = I.  Stage solves and the running
    product use long double, and so does the returned matrix.
    """
    ld = np.longdouble
    A0 = np.asarray(A0, dtype=ld)
    A1 = np.asarray(A1, dtype=ld)
    n = A0.shape[0]
    s = len(b)
    X = np.eye(n, dtype=ld)
    if nsteps <= 0:
        return X
    t0, t1, e = ld(t0), ld(t1), ld(e)
    h = (t1 - t0) / nsteps
    c = np.asarray(c, dtype=ld)
    ha = h * np.asarray(a, dtype=ld)
    hb = h * np.asarray(b, dtype=ld)
    big_eye = np.eye(s * n, dtype=ld)
    for k in range(nsteps):
        t = t0 + (t1 - t0) * k / nsteps
        sc = 1 / (1 + e * np.cos(t + c * h))
        L = A0[None] + A1[None] * sc[:, None, None]
        big = big_eye - (ha[:, :, None, None] * L[:, None, :, :]).transpose(0, 2, 1, 3).reshape(s * n, s * n)
        K = _solve_extended(big, L.reshape(s * n, n)).reshape(s, n, n)
        R = np.eye(n, dtype=ld) + np.tensordot(hb, K, axes=1)
        X = R @ X
    return X


def nbody_accel(q, masses):
    """Planar accelerations for positions q of shape (n, 2)."""
    q = np.asarray(q, dtype=float)
    d = q[None, :, :] - q[:, None, :]  # d[i, j] = q_j - q_i
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    inv3 = r2 ** -1.5
    np.fill_diagonal(inv3, 0.0)
    return np.einsum("ij,ijk->ik", inv3 * np.asarray(masses)[None, :], d)
