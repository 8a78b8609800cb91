"""Linearized Hamiltonian systems at an elliptic relative equilibrium.

Phase vectors are ordered momenta first, e.g. (Z, W1, W2, z, w1, w2) for the
12-dimensional system, each entry a planar 2-vector, and the symplectic form
is ``J = [[0, -I], [I, 0]]``.  Every coefficient matrix depends on the true
anomaly only through ``r/p = 1/(1 + e cos(theta))``, so each system is stored
as the affine pair ``B(theta) = C0 + (r/p) C1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cplx import I2, J2, psi
from .errors import Collision
from .symbasis import BetaSet, ReductionBasis

__all__ = [
    "OrbitParams",
    "PeriodicSystem",
    "EssentialSystem",
    "K_MATRIX",
    "symplectic_J",
    "transformed_potential",
    "hessian_fd",
    "analytic_potential_hessian",
    "hessian_blocks",
    "kepler_block",
    "essential_blocks",
    "assemble_full",
    "assemble_essential",
    "assemble_kepler",
    "assemble_decoupled",
    "kepler_system",
    "essential_system",
    "full_system",
    "decoupled_system",
    "quadratic_hamiltonian",
]

K_MATRIX = np.diag([2.0, -1.0])
_O2 = np.zeros((2, 2))


@dataclass(frozen=True)
class OrbitParams:
    e: float
    p: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.e < 1.0) or not math.isfinite(self.e):
            raise ValueError(f"eccentricity must lie in [0, 1), got {self.e}")
        if not (self.p > 0.0 and math.isfinite(self.p)):
            raise ValueError(f"semi-latus rectum must be positive, got {self.p}")

    def ratio(self, theta: float) -> float:
        """r(theta)/p."""
        return 1.0 / (1.0 + self.e * math.cos(theta))

    def r(self, theta: float) -> float:
        return self.p * self.ratio(theta)


def symplectic_J(n: int) -> np.ndarray:
    """Standard (2n)x(2n) symplectic matrix [[0, -I], [I, 0]]."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


# ---------------------------------------------------------------------------
# transformed potential and its Hessian at the equilibrium


def transformed_potential(z, w1, w2, basis: ReductionBasis) -> float:
    """Potential in the (z, w1, w2) coordinates of the reduction.

    Each pair distance is ``|Phi(a_i-a_j) z + Phi(b_i-b_j) w1 + (c_i-c_j) w2|``,
    computed as the modulus of the corresponding complex combination.
    """
    zc = complex(z[0], z[1])
    w1c = complex(w1[0], w1[1])
    w2c = complex(w2[0], w2[1])
    m, a, b, c = basis.masses, basis.positions, basis.v3, basis.v4
    total = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            d = abs((a[i] - a[j]) * zc + (b[i] - b[j]) * w1c + (c[i] - c[j]) * w2c)
            if d < 1e-12:
                raise Collision(f"bodies {i + 1} and {j + 1} collide (d = {d:.3e})")
            total += m[i] * m[j] / d
    return total


def hessian_fd(basis: ReductionBasis, sigma: float, h: float = 1e-5) -> np.ndarray:
    """Central-difference Hessian of the transformed potential at z=(sigma,0), w=0.

    Returns the symmetric 6x6 matrix over (z, w1, w2).
    """
    if not (1e-7 <= h <= 1e-3):
        raise ValueError(f"finite-difference step must lie in [1e-7, 1e-3], got {h}")
    x0 = np.zeros(6)
    x0[0] = sigma

    def f(x):
        return transformed_potential(x[0:2], x[2:4], x[4:6], basis)

    f0 = f(x0)
    E = np.eye(6) * h
    H = np.empty((6, 6))
    for i in range(6):
        H[i, i] = (f(x0 + E[i]) - 2.0 * f0 + f(x0 - E[i])) / h**2
        for j in range(i + 1, 6):
            H[i, j] = H[j, i] = (
                f(x0 + E[i] + E[j]) - f(x0 + E[i] - E[j])
                - f(x0 - E[i] + E[j]) + f(x0 - E[i] - E[j])
            ) / (4.0 * h**2)
    return H


def analytic_potential_hessian(mu: float, sigma: float, betas: BetaSet) -> np.ndarray:
    """Closed-form Hessian of the transformed potential at the equilibrium."""
    s3 = mu / sigma**3
    H = np.zeros((6, 6))
    H[0:2, 0:2] = s3 * K_MATRIX
    H[2:4, 2:4] = s3 * ((1.0 + betas.beta1) / 2.0 * I2 + psi(betas.beta11))
    H[4:6, 4:6] = s3 * ((1.0 + betas.beta2) / 2.0 * I2 + psi(betas.beta22))
    H[2:4, 4:6] = H[4:6, 2:4] = s3 * psi(betas.beta12)
    return H


def hessian_blocks(H: np.ndarray) -> dict[str, np.ndarray]:
    names = ("z", "w1", "w2")
    out = {}
    for i, a in enumerate(names):
        for j, b in enumerate(names[i:], start=i):
            out[a + b] = H[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
    return out


# ---------------------------------------------------------------------------
# the 2x2 Hessian blocks of the quadratic Hamiltonian


def kepler_block(theta: float, params: OrbitParams) -> np.ndarray:
    ec = params.e * math.cos(theta)
    return np.array([[-(2.0 - ec) / (1.0 + ec), 0.0], [0.0, 1.0]])


def essential_blocks(theta: float, params: OrbitParams, betas):
    """(H_w1w1, H_w1w2, H_w2w2) at true anomaly ``theta``."""
    s = params.ratio(theta)
    H11 = I2 - s * (1.5 * I2 + psi(betas.beta11))
    H22 = I2 - s * ((3.0 + betas.beta2) / 2.0 * I2 + psi(betas.beta22))
    H12 = -s * psi(betas.beta12)
    return H11, H12, H22


def _hamiltonian_matrix(pos_block: np.ndarray) -> np.ndarray:
    """[[I, -J], [J, H]] with J acting blockwise on each 2-dim pair."""
    n = pos_block.shape[0] // 2
    Jb = np.kron(np.eye(n), J2)
    return np.block([[np.eye(2 * n), -Jb], [Jb, pos_block]])


def assemble_kepler(theta: float, params: OrbitParams) -> np.ndarray:
    return _hamiltonian_matrix(kepler_block(theta, params))


def assemble_essential(theta: float, params: OrbitParams, betas) -> np.ndarray:
    H11, H12, H22 = essential_blocks(theta, params, betas)
    return _hamiltonian_matrix(np.block([[H11, H12], [H12.T, H22]]))


def assemble_decoupled(theta: float, params: OrbitParams, betas, which: int) -> np.ndarray:
    H11, _, H22 = essential_blocks(theta, params, betas)
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    return _hamiltonian_matrix(H11 if which == 1 else H22)


def assemble_full(theta: float, params: OrbitParams, betas) -> np.ndarray:
    H11, H12, H22 = essential_blocks(theta, params, betas)
    pos = np.block([
        [kepler_block(theta, params), _O2, _O2],
        [_O2, H11, H12],
        [_O2, H12.T, H22],
    ])
    return _hamiltonian_matrix(pos)


def quadratic_hamiltonian(theta: float, params: OrbitParams, betas, zeta) -> float:
    """H2 written out term by term for zeta = (Z, W1, W2, z, w1, w2)."""
    zeta = np.asarray(zeta, dtype=float)
    Z, W1, W2, z, w1, w2 = zeta.reshape(6, 2)
    Hzz = kepler_block(theta, params)
    H11, H12, H22 = essential_blocks(theta, params, betas)
    return float(
        0.5 * Z @ Z + z @ J2 @ Z + 0.5 * z @ Hzz @ z + w1 @ H12 @ w2
        + (0.5 * W1 @ W1 + w1 @ J2 @ W1 + 0.5 * w1 @ H11 @ w1)
        + (0.5 * W2 @ W2 + w2 @ J2 @ W2 + 0.5 * w2 @ H22 @ w2)
    )


# ---------------------------------------------------------------------------
# periodic systems in affine form


@dataclass(frozen=True)
class PeriodicSystem:
    """zeta' = J (C0 + C1/(1 + e cos theta)) zeta."""

    kind: str
    e: float
    C0: np.ndarray
    C1: np.ndarray

    @property
    def dim(self) -> int:
        return self.C0.shape[0]

    @property
    def J(self) -> np.ndarray:
        return symplectic_J(self.dim // 2)

    def B(self, theta: float) -> np.ndarray:
        return self.C0 + self.C1 / (1.0 + self.e * math.cos(theta))

    def generator_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """(J C0, J C1) so that the flow generator is A0 + (r/p) A1."""
        J = self.J
        return J @ self.C0, J @ self.C1


def _affine(pos0: np.ndarray, pos1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = pos0.shape[0]
    C0 = _hamiltonian_matrix(pos0)
    C1 = np.zeros((2 * n, 2 * n))
    C1[n:, n:] = pos1
    return C0, C1


def _essential_parts(betas):
    P11 = -(1.5 * I2 + psi(betas.beta11))
    P22 = -((3.0 + betas.beta2) / 2.0 * I2 + psi(betas.beta22))
    P12 = -psi(betas.beta12)
    return P11, P12, P22


def kepler_system(params: OrbitParams) -> PeriodicSystem:
    C0, C1 = _affine(I2.copy(), -(I2 + K_MATRIX))
    return PeriodicSystem("kepler4", params.e, C0, C1)


def essential_system(params: OrbitParams, betas) -> PeriodicSystem:
    P11, P12, P22 = _essential_parts(betas)
    C0, C1 = _affine(np.eye(4), np.block([[P11, P12], [P12.T, P22]]))
    return PeriodicSystem("essential8", params.e, C0, C1)


def decoupled_system(params: OrbitParams, betas, which: int) -> PeriodicSystem:
    P11, _, P22 = _essential_parts(betas)
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    C0, C1 = _affine(I2.copy(), P11 if which == 1 else P22)
    return PeriodicSystem("decoupled4", params.e, C0, C1)


def full_system(params: OrbitParams, betas) -> PeriodicSystem:
    P11, P12, P22 = _essential_parts(betas)
    pos1 = np.block([
        [-(I2 + K_MATRIX), _O2, _O2],
        [_O2, P11, P12],
        [_O2, P12.T, P22],
    ])
    C0, C1 = _affine(np.eye(6), pos1)
    return PeriodicSystem("full12", params.e, C0, C1)


@dataclass(frozen=True)
class EssentialSystem:
    params: OrbitParams
    beta2: float
    beta11: complex
    beta12: complex
    beta22: complex
    beta1: float = 0.0

    @classmethod
    def from_betas(cls, params: OrbitParams, betas: BetaSet) -> "EssentialSystem":
        return cls(params, betas.beta2, betas.beta11, betas.beta12, betas.beta22, betas.beta1)

    def matrix(self, theta: float) -> np.ndarray:
        return assemble_essential(theta, self.params, self)

    def system(self) -> PeriodicSystem:
        return essential_system(self.params, self)

    def decoupled(self, which: int) -> PeriodicSystem:
        return decoupled_system(self.params, self, which)
