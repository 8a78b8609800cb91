"""Elliptic relative equilibria in the time domain and a nonlinear n-body integrator.

The homographic solution generated by a normalized central configuration
``a`` is ``Q_i(t) = r(t) R(theta(t)) a_i`` where ``(r, theta)`` is a Kepler
orbit with gravitational parameter ``mu = U(a)``.  Time starts at
pericenter, so ``theta(0) = 0`` and ``r(0) = p/(1 + e)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import CollisionDetected, IntegrationError
from .linsys import OrbitParams

__all__ = [
    "PhaseState",
    "Trajectory",
    "solve_kepler",
    "true_anomaly",
    "kepler_period",
    "ere_state",
    "energy",
    "angular_momentum",
    "integrate_nbody",
    "homographic_deviation",
    "write_trajectory_csv",
    "COLLISION_DISTANCE",
]

COLLISION_DISTANCE = 1e-8


@dataclass(frozen=True)
class PhaseState:
    """Positions ``Q`` and momenta ``P = M Qdot``, both flat (x1, y1, x2, y2, ...)."""

    Q: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float).ravel()
        P = np.asarray(self.P, dtype=float).ravel()
        if Q.shape != P.shape or Q.size % 2:
            raise ValueError("Q and P must be flat arrays of equal even length")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)

    @property
    def n_bodies(self) -> int:
        return self.Q.size // 2

    @property
    def positions(self) -> np.ndarray:
        return self.Q.reshape(-1, 2)

    @property
    def momenta(self) -> np.ndarray:
        return self.P.reshape(-1, 2)

    def total_momentum(self) -> np.ndarray:
        return self.momenta.sum(axis=0)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.Q, self.P])

    @classmethod
    def from_vector(cls, y) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        half = y.size // 2
        return cls(y[:half], y[half:])


def solve_kepler(mean_anomaly: float, e: float, tol: float = 1e-13, max_iter: int = 100) -> float:
    """Eccentric anomaly E solving ``E - e sin E = M``.

    Newton's method seeded at ``M + e sin M``.  Iterates are kept inside the
    bracket ``[M - e, M + e]`` (which always contains the root), so the
    iteration cannot run away for eccentricities close to 1.
    """
    if not (0.0 <= e < 1.0):
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")
    M = float(mean_anomaly)
    if e == 0.0:
        return M
    turns = math.floor((M + math.pi) / (2.0 * math.pi))
    m = M - 2.0 * math.pi * turns
    lo, hi = m - e, m + e
    E = m + e * math.sin(m)
    for _ in range(max_iter):
        f = E - e * math.sin(E) - m
        if abs(f) <= tol:
            break
        if f > 0:
            hi = E
        else:
            lo = E
        step = f / (1.0 - e * math.cos(E))
        E_new = E - step
        if not (lo < E_new < hi):
            E_new = 0.5 * (lo + hi)
        E = E_new
    return E + 2.0 * math.pi * turns


def true_anomaly(E: float, e: float) -> float:
    """True anomaly from the eccentric anomaly, continuous in E."""
    half = 0.5 * E
    turns = math.floor((half + 0.5 * math.pi) / math.pi)
    h = half - math.pi * turns
    return 2.0 * (math.atan2(math.sqrt(1.0 + e) * math.sin(h), math.sqrt(1.0 - e) * math.cos(h)) + math.pi * turns)


def kepler_period(mu: float, p: float, e: float) -> float:
    return 2.0 * math.pi * (p / (1.0 - e * e)) ** 1.5 / math.sqrt(mu)


def ere_state(t: float, cc, params: OrbitParams, phase: float = 0.0) -> PhaseState:
    """State of the homographic solution at time ``t``.

    ``phase`` rotates the whole solution rigidly.
    """
    mu, p, e = cc.mu, params.p, params.e
    semi_major = p / (1.0 - e * e)
    n = math.sqrt(mu / semi_major**3)
    E = solve_kepler(n * t, e)
    theta = true_anomaly(E, e)
    r = p / (1.0 + e * math.cos(theta))
    rdot = math.sqrt(mu / p) * e * math.sin(theta)
    thetadot = math.sqrt(mu * p) / r**2
    rot = complex(math.cos(theta + phase), math.sin(theta + phase))
    a = np.asarray(cc.positions, dtype=complex)
    q = r * rot * a
    v = (rdot + 1j * r * thetadot) * rot * a
    m = np.asarray(cc.masses, dtype=float)
    Q = np.column_stack([q.real, q.imag]).ravel()
    P = (m[:, None] * np.column_stack([v.real, v.imag])).ravel()
    return PhaseState(Q, P)


def energy(state: PhaseState, masses) -> float:
    m = np.asarray(masses, dtype=float)
    kinetic = 0.5 * float(np.sum(np.sum(state.momenta**2, axis=1) / m))
    q = state.positions
    potential = 0.0
    for i in range(len(m)):
        for j in range(i + 1, len(m)):
            potential += m[i] * m[j] / float(np.hypot(*(q[i] - q[j])))
    return kinetic - potential


def angular_momentum(state: PhaseState) -> float:
    q, p = state.positions, state.momenta
    return float(np.sum(q[:, 0] * p[:, 1] - q[:, 1] * p[:, 0]))


def _min_distance(q: np.ndarray) -> float:
    d = q[:, None, :] - q[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    r[np.diag_indices_from(r)] = np.inf
    return float(r.min())


@dataclass(frozen=True)
class Trajectory:
    masses: np.ndarray
    t: np.ndarray
    y: np.ndarray  # shape (4n, len(t))
    dense: object
    nfev: int

    def __len__(self) -> int:
        return self.t.size

    def state(self, k: int) -> PhaseState:
        return PhaseState.from_vector(self.y[:, k])

    def states(self):
        return [self.state(k) for k in range(self.t.size)]

    def at(self, t: float) -> PhaseState:
        """Interpolated state from the integrator's dense output."""
        if self.dense is None:
            raise ValueError("trajectory was computed without dense output")
        return PhaseState.from_vector(self.dense(t))


def integrate_nbody(
    state0: PhaseState,
    masses,
    T: float,
    rtol: float = 1e-13,
    atol: float = 1e-13,
    *,
    t_eval=None,
    n_samples: int = 401,
    dense_output: bool = False,
) -> Trajectory:
    """Integrate the planar n-body equations in (Q, P) with DOP853.

    Samples are taken at ``t_eval`` (default: ``n_samples`` uniform times in
    ``[0, T]``).  Raises :class:`CollisionDetected` when two bodies come
    closer than ``COLLISION_DISTANCE``.
    """
    m = np.asarray(masses, dtype=float)
    nb = state0.n_bodies
    if m.shape != (nb,):
        raise ValueError(f"expected {nb} masses, got shape {m.shape}")
    if np.any(m <= 0):
        raise ValueError("masses must be positive")
    if _min_distance(state0.positions) < COLLISION_DISTANCE:
        raise CollisionDetected("initial state already in collision")
    half = 2 * nb

    def rhs(t, y):
        q = y[:half].reshape(nb, 2)
        dq = y[half:].reshape(nb, 2) / m[:, None]
        dp = m[:, None] * kernels.nbody_accel(q, m)
        return np.concatenate([dq.ravel(), dp.ravel()])

    def collision(t, y):
        return _min_distance(y[:half].reshape(nb, 2)) - COLLISION_DISTANCE

    collision.terminal = True
    collision.direction = -1

    if t_eval is None:
        t_eval = np.linspace(0.0, T, n_samples)
    sol = solve_ivp(
        rhs, (0.0, T), state0.as_vector(), method="DOP853", rtol=rtol, atol=atol,
        t_eval=t_eval, events=collision, dense_output=dense_output,
    )
    if sol.status == 1:
        raise CollisionDetected(f"pairwise distance fell below {COLLISION_DISTANCE} at t = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise IntegrationError(f"n-body integration failed: {sol.message}")
    return Trajectory(m, sol.t, sol.y, sol.sol, int(sol.nfev))


def homographic_deviation(traj: Trajectory, cc, params: OrbitParams, phase: float = 0.0) -> float:
    """max over samples and bodies of |Q_i(t) - r(t) R(theta(t)) a_i|."""
    worst = 0.0
    nb = traj.y.shape[0] // 4
    for k, t in enumerate(traj.t):
        ref = ere_state(float(t), cc, params, phase).positions
        q = traj.y[: 2 * nb, k].reshape(nb, 2)
        worst = max(worst, float(np.max(np.hypot(*(q - ref).T))))
    return worst


def write_trajectory_csv(path, traj: Trajectory) -> None:
    nb = traj.y.shape[0] // 4
    header = ["t"]
    header += [f"q{i + 1}{c}" for i in range(nb) for c in "xy"]
    header += [f"p{i + 1}{c}" for i in range(nb) for c in "xy"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, t in enumerate(traj.t):
            w.writerow(["%.17g" % t] + ["%.17g" % v for v in traj.y[:, k]])
