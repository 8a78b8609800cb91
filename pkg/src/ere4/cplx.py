"""Real 2x2 representations of complex numbers.

``phi`` embeds z as the rotation-scaling matrix [[x, -y], [y, x]] and ``psi``
as the reflection-scaling matrix [[x, y], [y, -x]].  Their products close
under the rules

    phi(z) phi(w) = phi(z w)          psi(z) psi(w) = phi(z conj(w))
    phi(z) psi(w) = psi(z w)          psi(z) phi(w) = psi(z conj(w))

which is all the Hessian bookkeeping downstream relies on.  Matrices are
stored row-major everywhere.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "phi",
    "psi",
    "phi_lift",
    "is_phi_image",
    "is_psi_image",
    "to_complex",
    "to_xy",
    "J2",
    "I2",
]

I2 = np.eye(2)
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])  # == phi(1j)


def phi(z: complex) -> np.ndarray:
    z = complex(z)
    return np.array([[z.real, -z.imag], [z.imag, z.real]])


def psi(z: complex) -> np.ndarray:
    z = complex(z)
    return np.array([[z.real, z.imag], [z.imag, -z.real]])


def phi_lift(T) -> np.ndarray:
    """Entrywise block lift of an (n, m) complex matrix to a (2n, 2m) real one.

    The lift is a *-homomorphism: ``phi_lift(S @ T) == phi_lift(S) @ phi_lift(T)``
    and ``phi_lift(T).T == phi_lift(T.conj().T)``.
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    n, m = T.shape
    out = np.empty((2 * n, 2 * m))
    out[0::2, 0::2] = T.real
    out[1::2, 1::2] = T.real
    out[0::2, 1::2] = -T.imag
    out[1::2, 0::2] = T.imag
    return out


def is_phi_image(m, atol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(abs(m[0, 0] - m[1, 1]) <= atol and abs(m[1, 0] + m[0, 1]) <= atol)


def is_psi_image(m, atol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(abs(m[0, 0] + m[1, 1]) <= atol and abs(m[0, 1] - m[1, 0]) <= atol)


def to_complex(xy) -> np.ndarray:
    """(..., 2) real array -> (...) complex array."""
    xy = np.asarray(xy, dtype=float)
    return xy[..., 0] + 1j * xy[..., 1]


def to_xy(z) -> np.ndarray:
    """(...) complex array -> (..., 2) real array."""
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1)
