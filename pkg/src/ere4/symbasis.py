"""M-unitary eigenbasis of D and the symplectic coordinate matrix A.

For a non-collinear central configuration the matrix D has eigenvectors

    v1 = (1, 1, 1, 1)          eigenvalue mu
    v2 = (z_1, ..., z_4)       eigenvalue 0
    v3 = k conj(v2) + l v2     eigenvalue 0
    v4 = (c_1, ..., c_4) real  eigenvalue tr(D) - mu

orthonormal for the inner product <u, v> = conj(u)^T diag(m) v.  The real
vector v4 is built from signed areas of the triangles spanned by three of
the four bodies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centralconfig import (
    PAIRS,
    CentralConfiguration,
    Configuration,
    signed_area,
    signed_areas,
)
from .cplx import phi, phi_lift
from .errors import CollinearDegeneracy, FGIdentityViolation

__all__ = [
    "ReductionBasis",
    "BetaSet",
    "signed_area",
    "build_kl",
    "build_basis",
    "compute_betas",
    "mass_matrix",
    "FG_TOL",
]

FG_TOL = 1e-8
_ZERO_SUM_TOL = 1e-12
_COLLINEAR_MARGIN = 1e-10


@dataclass(frozen=True)
class ReductionBasis:
    masses: np.ndarray
    positions: np.ndarray  # a_i as complex numbers
    mu: float
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray  # entries b_i
    v4: np.ndarray  # entries c_i (real)
    k: float
    l: complex
    rho: float
    A: np.ndarray  # (8, 8)

    @property
    def A_tilde(self) -> np.ndarray:
        """The complex 4x4 matrix with columns v1..v4."""
        return np.column_stack([self.v1, self.v2, self.v3, self.v4]).astype(complex)

    def gram(self) -> np.ndarray:
        """conj(A~)^T diag(m) A~, which is the identity for a valid basis."""
        At = self.A_tilde
        return At.conj().T @ (self.masses[:, None] * At)

    def unitarity_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(4))))

    def symplectic_defect(self) -> float:
        """max |A^T M A - I_8|."""
        M = mass_matrix(self.masses)
        return float(np.max(np.abs(self.A.T @ M @ self.A - np.eye(8))))


@dataclass(frozen=True)
class BetaSet:
    beta1: float
    beta2: float
    beta11: complex
    beta12: complex
    beta22: complex
    fg_defect: float = 0.0


def mass_matrix(masses) -> np.ndarray:
    """diag(m1, m1, m2, m2, m3, m3, m4, m4)."""
    return np.diag(np.repeat(np.asarray(masses, dtype=float), 2))


def _config_of(cc) -> Configuration:
    return cc.config if isinstance(cc, CentralConfiguration) else cc


def build_kl(config) -> tuple[float, complex]:
    """Coefficients of v3 = k conj(v2) + l v2 (k > 0)."""
    config = _config_of(config)
    m, z = config.masses, config.positions
    s = complex(np.sum(m * np.conj(z) ** 2))
    if abs(s) >= 1.0 - _COLLINEAR_MARGIN:
        raise CollinearDegeneracy(
            f"|sum m_i conj(z_i)^2| = {abs(s):.12f} is not below 1; configuration is collinear"
        )
    if abs(s) <= _ZERO_SUM_TOL:
        return 1.0, 0j
    k = 1.0 / math.sqrt(1.0 - abs(s) ** 2)
    return k, -s * k


def build_basis(cc: CentralConfiguration) -> ReductionBasis:
    config = _config_of(cc)
    m, a = config.masses, config.positions
    if np.all(np.abs(signed_areas(a)) <= 1e-12):
        raise CollinearDegeneracy("basis construction needs a non-collinear configuration")
    k, l = build_kl(config)
    mu = cc.mu if isinstance(cc, CentralConfiguration) else float(
        sum(m[i] * m[j] / abs(a[i] - a[j]) for i, j in PAIRS)
    )
    v1 = np.ones(4)
    v2 = a.astype(complex)
    v3 = k * np.conj(a) + l * a
    rho = math.sqrt(float(np.prod(m)))
    delta = signed_areas(a)  # (D234, D134, D124, D123)
    sign = np.array([1.0, -1.0, 1.0, -1.0])
    v4 = sign * 4.0 * k * rho * delta / m

    A = np.empty((8, 8))
    for i in range(4):
        rows = slice(2 * i, 2 * i + 2)
        A[rows, 0:2] = np.eye(2)
        A[rows, 2:4] = phi(a[i])
        A[rows, 4:6] = phi(v3[i])
        A[rows, 6:8] = v4[i] * np.eye(2)
    return ReductionBasis(
        masses=m, positions=a, mu=float(mu), v1=v1, v2=v2, v3=v3, v4=v4,
        k=float(k), l=complex(l), rho=rho, A=A,
    )


def _pair_sum(m, a, x, y, mu) -> complex:
    total = 0j
    for i, j in PAIRS:
        d = a[i] - a[j]
        total += m[i] * m[j] * d**2 * np.conj(x[i] - x[j]) * np.conj(y[i] - y[j]) / abs(d) ** 5
    return complex(1.5 * total / mu)


def _pull(m, a, x) -> np.ndarray:
    """F_i = sum_{j != i} m_i m_j (x_i - x_j)/|a_i - a_j|^3."""
    out = np.zeros(4, dtype=complex)
    for i, j in PAIRS:
        w = m[i] * m[j] * (x[i] - x[j]) / abs(a[i] - a[j]) ** 3
        out[i] += w
        out[j] -= w
    return out


def compute_betas(cc: CentralConfiguration, basis: ReductionBasis, *, fg_tol: float = FG_TOL) -> BetaSet:
    """Coefficients of the essential system.

    beta1 is reported as -lambda_3/mu with lambda_3 the Rayleigh quotient of
    D on v3 (zero up to rounding); beta2 = 1 - tr(D)/mu.  The pair sums for
    beta11, beta12, beta22 are cross-checked against the eigen-relations
    F_i = mu (1 + beta1) m_i b_i and G_i = mu (1 + beta2) m_i c_i.
    """
    m, a, mu = basis.masses, basis.positions, basis.mu
    D = cc.D
    b, c = basis.v3, basis.v4
    lam3 = complex(np.conj(b) @ (m * (D @ b))).real
    beta1 = -lam3 / mu
    beta2 = 1.0 - float(np.trace(D)) / mu

    F = _pull(m, a, b)
    G = _pull(m, a, c.astype(complex))
    fg = max(
        float(np.max(np.abs(F - mu * (1.0 + beta1) * m * b))),
        float(np.max(np.abs(G - mu * (1.0 + beta2) * m * c))),
    )
    if not fg <= fg_tol:
        raise FGIdentityViolation(f"F/G identity defect {fg:.3e} exceeds {fg_tol:.1e}")
    return BetaSet(
        beta1=float(beta1),
        beta2=float(beta2),
        beta11=_pair_sum(m, a, b, b, mu),
        beta12=_pair_sum(m, a, b, c, mu),
        beta22=_pair_sum(m, a, c, c, mu),
        fg_defect=fg,
    )


def lifted_unitarity_defect(basis: ReductionBasis) -> float:
    """Same check as ``symplectic_defect`` but through the complex lift."""
    At = phi_lift(basis.A_tilde)
    Mt = phi_lift(np.diag(basis.masses))
    return float(np.max(np.abs(At.T @ Mt @ At - np.eye(8))))
