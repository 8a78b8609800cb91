"""Normalized four-body configurations and central configurations.

Positions are handled as complex numbers ``z_i = x_i + i y_i``.  A
configuration is *normalized* when the masses sum to one, the center of mass
sits at the origin and ``sum m_i |z_i|^2 == 1``; under that normalization the
central-configuration multiplier equals the potential ``U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateGeometry, InvalidMass, NoConvergence, SingularJacobian

__all__ = [
    "Configuration",
    "CentralConfiguration",
    "normalize",
    "potential",
    "cc_residual",
    "solve_cc",
    "build_B",
    "build_D",
    "d_tilde",
    "signed_area",
    "signed_areas",
    "is_collinear",
    "family_seed",
    "FAMILIES",
]

N_BODIES = 4
PAIRS = tuple(combinations(range(N_BODIES), 2))

RESIDUAL_TOL = 1e-12
INVARIANT_TOL = 1e-10
COLLINEAR_TOL = 1e-12
GAUGE_RADIUS = 0.1


@dataclass(frozen=True)
class Configuration:
    masses: np.ndarray  # (4,) float, sums to 1
    positions: np.ndarray  # (4,) complex

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        z = np.array(self.positions, dtype=complex)
        if m.shape != (N_BODIES,) or z.shape != (N_BODIES,):
            raise ValueError("expected four masses and four positions")
        m.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "positions", z)

    @property
    def xy(self) -> np.ndarray:
        return np.stack([self.positions.real, self.positions.imag], axis=-1)

    def min_distance(self) -> float:
        z = self.positions
        return min(abs(z[i] - z[j]) for i, j in PAIRS)

    def normalization_defects(self) -> tuple[float, float, float]:
        """|sum m - 1|, |sum m z|, |sum m |z|^2 - 1|."""
        m, z = self.masses, self.positions
        return (
            abs(m.sum() - 1.0),
            abs(np.sum(m * z)),
            abs(np.sum(m * np.abs(z) ** 2) - 1.0),
        )


@dataclass(frozen=True)
class CentralConfiguration:
    config: Configuration
    mu: float
    sigma: float
    p: float
    residual_norm: float
    B: np.ndarray
    D: np.ndarray
    collinear: bool
    iterations: int = 0
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def masses(self) -> np.ndarray:
        return self.config.masses

    @property
    def positions(self) -> np.ndarray:
        return self.config.positions

    @property
    def trace_D(self) -> float:
        return float(np.trace(self.D))

    @property
    def D_tilde(self) -> np.ndarray:
        return d_tilde(self.config, self.mu)


def _check_masses(masses) -> np.ndarray:
    m = np.asarray(masses, dtype=float).reshape(-1)
    if m.shape != (N_BODIES,):
        raise InvalidMass(f"expected 4 masses, got {m.size}")
    if not np.all(np.isfinite(m)) or np.any(m <= 0):
        raise InvalidMass(f"masses must be positive and finite, got {m.tolist()}")
    return m


def _as_complex_positions(positions) -> np.ndarray:
    arr = np.asarray(positions)
    if np.iscomplexobj(arr):
        z = arr.astype(complex).reshape(-1)
    else:
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (N_BODIES, 2):
            raise DegenerateGeometry(f"expected 4 planar points, got shape {arr.shape}")
        z = arr[:, 0] + 1j * arr[:, 1]
    if z.shape != (N_BODIES,) or not np.all(np.isfinite(z)):
        raise DegenerateGeometry("expected 4 finite planar points")
    return z


def normalize(masses, positions) -> Configuration:
    """Scale masses to unit total, center the positions and fix 2I = 1.

    ``positions`` may be a (4,) complex array or a (4, 2) real array.
    """
    m = _check_masses(masses)
    m = m / m.sum()
    z = _as_complex_positions(positions)
    for i, j in PAIRS:
        if abs(z[i] - z[j]) <= 1e-14 * max(1.0, abs(z[i]), abs(z[j])):
            raise DegenerateGeometry(f"bodies {i + 1} and {j + 1} coincide")
    z = z - np.sum(m * z)
    z = z / math.sqrt(np.sum(m * np.abs(z) ** 2))
    return Configuration(m, z)


def potential(config: Configuration) -> float:
    m, z = config.masses, config.positions
    return float(sum(m[i] * m[j] / abs(z[i] - z[j]) for i, j in PAIRS))


def _accelerations(m: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros(N_BODIES, dtype=complex)
    for i, j in PAIRS:
        d = z[j] - z[i]
        r3 = abs(d) ** 3
        acc[i] += m[j] * d / r3
        acc[j] -= m[i] * d / r3
    return acc


def cc_residual(config: Configuration) -> np.ndarray:
    """Per-body defect of the central-configuration equations.

    Component i is ``sum_j m_j (z_j - z_i)/|z_i - z_j|^3 + U z_i``: the
    gravitational pull plus the centripetal term with multiplier
    ``U / (2I) = U``.  It vanishes exactly at a central configuration.
    """
    m, z = config.masses, config.positions
    return _accelerations(m, z) + potential(config) * z


def _residual_vector(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Scale-consistent residual off the normalization manifold:
    # multiplier U/(sum m |z|^2) instead of U.
    z = x[0::2] + 1j * x[1::2]
    U = sum(m[i] * m[j] / abs(z[i] - z[j]) for i, j in PAIRS)
    S = float(np.sum(m * np.abs(z) ** 2))
    F = _accelerations(m, z) + (U / S) * z
    out = np.empty(2 * N_BODIES)
    out[0::2] = F.real
    out[1::2] = F.imag
    return out


def _residual_jacobian(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    q = x.reshape(N_BODIES, 2)
    Jac = np.zeros((2 * N_BODIES, 2 * N_BODIES))
    gradU = np.zeros((N_BODIES, 2))
    U = 0.0
    for i, j in PAIRS:
        d = q[j] - q[i]
        r = math.hypot(d[0], d[1])
        U += m[i] * m[j] / r
        # d/dq_j of (q_j - q_i)/r^3
        T = np.eye(2) / r**3 - 3.0 * np.outer(d, d) / r**5
        si, sj = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
        Jac[si, sj] += m[j] * T
        Jac[si, si] -= m[j] * T
        Jac[sj, si] += m[i] * T
        Jac[sj, sj] -= m[i] * T
        gradU[i] += m[i] * m[j] * d / r**3
        gradU[j] -= m[i] * m[j] * d / r**3
    S = float(np.sum(m * np.sum(q**2, axis=1)))
    lam = U / S
    gradS = 2.0 * m[:, None] * q
    gradlam = (gradU / S - U * gradS / S**2).reshape(-1)
    Jac += lam * np.eye(2 * N_BODIES) + np.outer(q.reshape(-1), gradlam)
    return Jac


def _gauge_body(z: np.ndarray) -> int:
    """Body whose argument is frozen: body 1 unless it sits near the center of mass."""
    r = np.abs(z)
    if r[0] >= GAUGE_RADIUS * r.max():
        return 0
    return int(np.argmax(r >= GAUGE_RADIUS * r.max()))


def _project(m: np.ndarray, x: np.ndarray, gauge_angle: float, gauge_body: int = 0) -> np.ndarray:
    z = x[0::2] + 1j * x[1::2]
    z = z - np.sum(m * z)
    z = z / math.sqrt(np.sum(m * np.abs(z) ** 2))
    z = z * np.exp(1j * (gauge_angle - np.angle(z[gauge_body])))
    out = np.empty(2 * N_BODIES)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def signed_area(p1: complex, p2: complex, p3: complex) -> float:
    """Oriented area of the triangle (p1, p2, p3); positive counterclockwise."""
    u, v = complex(p2) - complex(p1), complex(p3) - complex(p1)
    return 0.5 * (u.real * v.imag - v.real * u.imag)


def signed_areas(positions) -> np.ndarray:
    """Signed areas (Delta_234, Delta_134, Delta_124, Delta_123)."""
    z = np.asarray(positions, dtype=complex)
    out = np.empty(N_BODIES)
    for k in range(N_BODIES):
        i, j, l = [t for t in range(N_BODIES) if t != k]
        out[k] = signed_area(z[i], z[j], z[l])
    return out


def is_collinear(config: Configuration, tol: float = COLLINEAR_TOL) -> bool:
    return bool(np.all(np.abs(signed_areas(config.positions)) <= tol))


def build_B(config: Configuration) -> np.ndarray:
    m, z = config.masses, config.positions
    B = np.zeros((N_BODIES, N_BODIES))
    for i, j in PAIRS:
        B[i, j] = B[j, i] = m[i] * m[j] / abs(z[i] - z[j]) ** 3
    B[np.diag_indices(N_BODIES)] = -B.sum(axis=1)
    return B


def build_D(config: Configuration, mu: float | None = None) -> np.ndarray:
    if mu is None:
        mu = potential(config)
    return mu * np.eye(N_BODIES) + build_B(config) / config.masses[:, None]


def d_tilde(config: Configuration, mu: float | None = None) -> np.ndarray:
    """The symmetrized matrix M^{1/2} D M^{-1/2}."""
    if mu is None:
        mu = potential(config)
    s = np.sqrt(config.masses)
    return mu * np.eye(N_BODIES) + build_B(config) / np.outer(s, s)


def central_configuration(
    config: Configuration, p: float = 1.0, *, iterations: int = 0, history=()
) -> CentralConfiguration:
    """Wrap a configuration with its derived matrices (no solving)."""
    if not p > 0:
        raise ValueError("semi-latus rectum p must be positive")
    mu = potential(config)
    res = float(np.max(np.abs(cc_residual(config))))
    return CentralConfiguration(
        config=config,
        mu=mu,
        sigma=(mu * p) ** 0.25,
        p=float(p),
        residual_norm=res,
        B=build_B(config),
        D=build_D(config, mu),
        collinear=is_collinear(config),
        iterations=iterations,
        history=tuple(history),
    )


def solve_cc(
    masses,
    seed: Configuration,
    tol: float = RESIDUAL_TOL,
    *,
    max_iter: int = 200,
    p: float = 1.0,
) -> CentralConfiguration:
    """Damped Newton iteration for a central configuration near ``seed``.

    Each step solves the residual linearization together with the linearized
    center-of-mass, inertia and rotation-gauge constraints (the argument of
    z_1 stays at its seed value; when z_1 lies within 0.1 max|z_i| of the
    center of mass the first body outside that radius is used instead) in
    the least-squares sense, then projects back onto the normalization
    manifold.  Iteration stops once the max-norm
    of :func:`cc_residual` drops strictly below ``tol``.

    Raises
    ------
    NoConvergence
        ``max_iter`` steps without reaching ``tol``.
    SingularJacobian
        The constrained Jacobian is rank deficient at an iterate.
    """
    m = _check_masses(masses)
    m = m / m.sum()
    start = normalize(m, seed.positions)
    g = _gauge_body(start.positions)
    gauge = float(np.angle(start.positions[g]))
    x = np.empty(2 * N_BODIES)
    x[0::2] = start.positions.real
    x[1::2] = start.positions.imag
    x = _project(m, x, gauge, g)

    def resnorm(v):
        return float(np.max(np.abs(_residual_vector(m, v))))

    norm = resnorm(x)
    history = [norm]
    converged_at = None
    for it in range(max_iter):
        if norm < tol and converged_at is None:
            converged_at = it
        if converged_at is not None and (it > converged_at or norm == 0.0):
            # one polishing step past tol; kept only if it helped (see below)
            return central_configuration(
                normalize(m, x.reshape(4, 2)), p, iterations=it, history=history
            )
        F = _residual_vector(m, x)
        Jac = _residual_jacobian(m, x)
        C = np.zeros((4, 2 * N_BODIES))
        C[0, 0::2] = m
        C[1, 1::2] = m
        C[2] = np.repeat(m, 2) * x
        C[3, 2 * g], C[3, 2 * g + 1] = -x[2 * g + 1], x[2 * g]
        K = np.vstack([Jac, C])
        sv = np.linalg.svd(K, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise SingularJacobian(
                f"constrained Jacobian is rank deficient (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})"
            )
        rhs = np.concatenate([-F, np.zeros(4)])
        step = np.linalg.lstsq(K, rhs, rcond=None)[0]
        t = 1.0
        while True:
            trial = x + t * step
            z = trial[0::2] + 1j * trial[1::2]
            if min(abs(z[i] - z[j]) for i, j in PAIRS) > 0:
                trial = _project(m, trial, gauge, g)
                tnorm = resnorm(trial)
                if tnorm < norm or t < 1.0 / 1024:
                    break
            t *= 0.5
        if converged_at is not None and tnorm >= norm:
            break
        x, norm = trial, tnorm
        history.append(norm)
    if norm < tol:
        return central_configuration(
            normalize(m, x.reshape(4, 2)), p, iterations=len(history) - 1, history=history
        )
    raise NoConvergence(
        f"residual {norm:.3e} still above tol={tol:.1e} after {max_iter} iterations"
    )


# named seeds ---------------------------------------------------------------

def _square():
    return np.array([1.0, 1j, -1.0, -1j])


def _collinear():
    return np.array([-1.5, -0.5, 0.5, 1.5], dtype=complex)


def _triangle_plus_center():
    w = np.exp(2j * np.pi / 3)
    return np.array([1.0, w, w * w, 0.0])


FAMILIES = {
    "square": (_square, (1.0, 1.0, 1.0, 1.0)),
    "collinear": (_collinear, (1.0, 1.0, 1.0, 1.0)),
    "triangle_plus_center": (_triangle_plus_center, (1.0, 1.0, 1.0, 1.0)),
}


def family_seed(name: str, masses=None) -> Configuration:
    """Normalized seed configuration of a named family."""
    try:
        maker, default_masses = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return normalize(default_masses if masses is None else masses, maker())
