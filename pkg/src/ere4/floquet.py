"""Monodromy matrices and spectral stability of the periodic linear systems.

The default propagator is implicit Gauss-Legendre collocation on a uniform
grid in the true anomaly.  It is symplectic, so ``M^T J M = J`` holds up to
rounding for every step size and the symplectic defect measures arithmetic
error alone.  The step count is doubled until two successive
fundamental matrices agree to ``rtol``/``atol``.  An adaptive explicit
Dormand-Prince 8(5,3) route is available as ``method="dop853"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from . import kernels
from .errors import IntegrationError, StepUnderflow
from .linsys import (
    OrbitParams,
    PeriodicSystem,
    decoupled_system,
    essential_system,
    full_system,
    kepler_system,
    symplectic_J,
)

__all__ = [
    "MonodromyReport",
    "AutonomousSpectrum",
    "gauss_legendre_tableau",
    "integrate_fundamental",
    "monodromy",
    "spectrum_autonomous",
    "refined_eigenvalues",
    "spectrum_distance",
    "classify",
    "symplectic_defect",
    "decoupled_reports",
    "UNIT_CIRCLE_TOL",
    "ACCEPT_DEFECT",
]

TWO_PI = 2.0 * math.pi
UNIT_CIRCLE_TOL = 1e-7
ACCEPT_DEFECT = 1e-8
DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-14
DEFAULT_STAGES = 4
MAX_STEPS = 1 << 18

STABILITY_CLASSES = ("spectrally_stable", "elliptic_hyperbolic_mixed", "unstable", "degenerate")


def gauss_legendre_tableau(s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Butcher tableau (a, b, c) of the s-stage Gauss-Legendre method (order 2s)."""
    x, w = np.polynomial.legendre.leggauss(s)
    c = (x + 1.0) / 2.0
    b = w / 2.0
    powers = np.arange(s)
    V = c[:, None] ** powers[None, :]
    P = c[:, None] ** (powers[None, :] + 1) / (powers[None, :] + 1)
    a = P @ np.linalg.inv(V)
    return a, b, c


_TABLEAUS: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _tableau(s: int):
    if s not in _TABLEAUS:
        _TABLEAUS[s] = gauss_legendre_tableau(s)
    return _TABLEAUS[s]


def _initial_steps(e: float, span: float) -> int:
    # The coefficient 1/(1 + e cos theta) peaks at 1/(1 - e) near apocenter.
    per_period = 16 * math.ceil(4.0 / math.sqrt(1.0 - e))
    return max(1, math.ceil(per_period * abs(span) / TWO_PI))


def _integrate(system: PeriodicSystem, span, rtol, atol, method, steps, stages, max_steps=MAX_STEPS):
    t0, t1 = float(span[0]), float(span[1])
    n = system.dim
    if t0 == t1:
        return np.eye(n, dtype=np.longdouble), {"method": method, "steps": 0, "rtol": rtol, "atol": atol, "error_estimate": 0.0}
    if not (rtol > 0 and atol > 0):
        raise ValueError("rtol and atol must be positive")
    A0, A1 = system.generator_pair()
    e = system.e

    if method == "gauss":
        a, b, c = _tableau(stages)
        stats = {"method": "gauss", "stages": stages, "rtol": rtol, "atol": atol}
        if steps is not None:
            X = kernels.gauss_propagate(A0, A1, e, t0, t1, int(steps), a, b, c)
            stats.update(steps=int(steps), error_estimate=None)
            return X, stats
        N = _initial_steps(e, t1 - t0)
        X = kernels.gauss_propagate(A0, A1, e, t0, t1, N, a, b, c)
        while True:
            if 2 * N > max_steps:
                raise StepUnderflow(
                    f"no convergence with {N} Gauss-Legendre steps (e={e}); refusing to continue"
                )
            X2 = kernels.gauss_propagate(A0, A1, e, t0, t1, 2 * N, a, b, c)
            err = float(np.max(np.abs(X2 - X)))
            if not np.all(np.isfinite(X2)):
                raise IntegrationError("non-finite fundamental matrix")
            if err <= atol + rtol * float(np.max(np.abs(X2))):
                stats.update(steps=2 * N, error_estimate=err)
                return X2, stats
            N *= 2
            X = X2

    if method == "dop853":
        def rhs(t, y):
            X = y.reshape(n, n)
            return ((A0 + A1 / (1.0 + e * math.cos(t))) @ X).ravel()

        sol = solve_ivp(rhs, (t0, t1), np.eye(n).ravel(), method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise StepUnderflow(f"DOP853 failed: {sol.message}")
        stats = {
            "method": "dop853", "rtol": rtol, "atol": atol,
            "steps": int(sol.t.size - 1), "rhs_evaluations": int(sol.nfev), "error_estimate": None,
        }
        return sol.y[:, -1].reshape(n, n), stats

    raise ValueError(f"unknown method {method!r}")


def integrate_fundamental(
    system: PeriodicSystem,
    span=(0.0, TWO_PI),
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    *,
    method: str = "gauss",
    steps: int | None = None,
    stages: int = DEFAULT_STAGES,
    max_steps: int = MAX_STEPS,
) -> np.ndarray:
    """Fundamental matrix X(span[1]) of zeta' = J B(theta) zeta with X(span[0]) = I.

    With ``steps`` given, the Gauss-Legendre route takes exactly that many
    uniform steps and skips the doubling check.
    """
    X, _ = _integrate(system, span, rtol, atol, method, steps, stages, max_steps)
    return np.asarray(X, dtype=float)


# ---------------------------------------------------------------------------
# spectral post-processing


def symplectic_defect(M: np.ndarray) -> float:
    """||M^T J M - J||_inf (max row sum), accumulated in extended precision."""
    J = symplectic_J(M.shape[0] // 2).astype(np.longdouble)
    Ml = M.astype(np.longdouble)
    return float(np.max(np.sum(np.abs(Ml.T @ J @ Ml - J), axis=1)))


def _det_extended(M: np.ndarray) -> float:
    A = M.astype(np.longdouble).copy()
    n = A.shape[0]
    det = np.longdouble(1.0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0:
            return 0.0
        if p != k:
            A[[k, p]] = A[[p, k]]
            det = -det
        det *= A[k, k]
        A[k + 1 :, k:] -= np.outer(A[k + 1 :, k] / A[k, k], A[k, k:])
    return float(det)


def _cluster_radius(M: np.ndarray, error_estimate: float | None) -> float:
    # A defective eigenvalue with Jordan coupling ~||M|| moves by about
    # sqrt(||M|| * perturbation); perturbation = rounding or integration error.
    norm = float(np.linalg.norm(M, 2))
    pert = max(np.finfo(float).eps * norm, error_estimate or 0.0)
    return min(1e-3, max(1e-9, 8.0 * math.sqrt(norm * pert)))


def refined_eigenvalues(M: np.ndarray, radius: float | None = None) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigenvalues with near-coincident groups replaced by their mean.

    The mean of a cluster is well conditioned even when individual members
    are not (defective eigenvalues).  Returns ``(refined, raw, spread)``
    where ``spread`` is the largest deviation of a raw member from its
    cluster mean.
    """
    raw = np.linalg.eigvals(M)
    if radius is None:
        radius = _cluster_radius(M, None)
    n = raw.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(abs(raw[i]), abs(raw[j]), np.finfo(float).tiny)
            if abs(raw[i] - raw[j]) <= radius * scale:
                parent[find(i)] = find(j)
    refined = raw.copy()
    spread = 0.0
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for members in groups.values():
        if len(members) > 1:
            mean = raw[members].mean()
            refined[members] = mean
            spread = max(spread, float(np.max(np.abs(raw[members] - mean))))
    order = np.lexsort((refined.imag, refined.real, np.round(np.abs(refined), 12)))
    return refined[order], raw, spread


def spectrum_distance(a, b, *, relative: bool = False) -> float:
    """Largest distance between optimally matched eigenvalues of two spectra."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError(f"spectra differ in size: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    if relative:
        cost = cost / np.maximum(1.0, np.maximum(np.abs(a)[:, None], np.abs(b)[None, :]))
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if a.size else 0.0


def classify(M: np.ndarray, eigenvalues: np.ndarray, tol: float = UNIT_CIRCLE_TOL) -> str:
    """Coarse spectral class of a monodromy matrix.

    Hyperbolic parts dominate: any eigenvalue off the unit circle gives
    ``unstable`` (all off) or ``elliptic_hyperbolic_mixed``.  With the whole
    spectrum on the circle, a repeated eigenvalue 1 or a failed
    diagonalizability check gives ``degenerate``.
    """
    mods = np.abs(eigenvalues)
    on = np.abs(mods - 1.0) <= tol
    if not np.all(on):
        return "unstable" if not np.any(on) else "elliptic_hyperbolic_mixed"
    if int(np.sum(np.abs(eigenvalues - 1.0) <= tol)) >= 2:
        return "degenerate"
    _, V = np.linalg.eig(M)
    if np.linalg.cond(V) > 1e8:
        return "degenerate"
    return "spectrally_stable"


@dataclass(frozen=True)
class MonodromyReport:
    system_kind: str
    e: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    raw_eigenvalues: np.ndarray
    symplectic_defect: float
    determinant: float
    stability: str
    cluster_spread: float
    integrator_stats: dict = field(default_factory=dict)

    @property
    def moduli(self) -> np.ndarray:
        return np.sort(np.abs(self.eigenvalues))

    @property
    def accepted(self) -> bool:
        """Quality gate: symplectic defect and |det - 1| both within 1e-8."""
        return self.symplectic_defect <= ACCEPT_DEFECT and abs(self.determinant - 1.0) <= ACCEPT_DEFECT

    def to_dict(self) -> dict:
        return {
            "system_kind": self.system_kind,
            "e": self.e,
            "matrix": self.matrix.tolist(),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "raw_eigenvalues": [[float(z.real), float(z.imag)] for z in self.raw_eigenvalues],
            "eigenvalue_moduli": [float(x) for x in self.moduli],
            "symplectic_defect": self.symplectic_defect,
            "determinant": self.determinant,
            "stability": self.stability,
            "accepted": self.accepted,
            "cluster_spread": self.cluster_spread,
            "integrator_stats": dict(self.integrator_stats),
        }


def monodromy(
    system: PeriodicSystem,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    *,
    method: str = "gauss",
    steps: int | None = None,
    stages: int = DEFAULT_STAGES,
    max_steps: int = MAX_STEPS,
) -> MonodromyReport:
    # quality gates use the integrator's own (extended precision) result so
    # that they measure integration error, not the final rounding to float64
    M_ext, stats = _integrate(system, (0.0, TWO_PI), rtol, atol, method, steps, stages, max_steps)
    M = np.asarray(M_ext, dtype=float)
    radius = _cluster_radius(M, stats.get("error_estimate"))
    refined, raw, spread = refined_eigenvalues(M, radius)
    stats = dict(stats, cluster_radius=radius, backend=kernels.BACKEND if method == "gauss" else "scipy")
    return MonodromyReport(
        system_kind=system.kind,
        e=system.e,
        matrix=M,
        eigenvalues=refined,
        raw_eigenvalues=raw,
        symplectic_defect=symplectic_defect(M_ext),
        determinant=_det_extended(M_ext),
        stability=classify(M, refined),
        cluster_spread=spread,
        integrator_stats=stats,
    )


@dataclass(frozen=True)
class AutonomousSpectrum:
    eigenvalues: np.ndarray
    purely_imaginary: bool
    semisimple: bool

    @property
    def linearly_stable(self) -> bool:
        return self.purely_imaginary and self.semisimple


def spectrum_autonomous(system: PeriodicSystem, tol: float = 1e-9) -> AutonomousSpectrum:
    """Eigenvalues of the constant generator J B for a circular orbit (e = 0)."""
    if system.e != 0.0:
        raise ValueError("the autonomous spectrum is defined for e = 0 only")
    L = system.J @ system.B(0.0)
    w, V = np.linalg.eig(L)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    return AutonomousSpectrum(
        eigenvalues=w,
        purely_imaginary=bool(np.all(np.abs(w.real) <= tol * max(1.0, float(np.max(np.abs(w)))))),
        semisimple=bool(np.linalg.cond(V) < 1e8),
    )


def decoupled_reports(params: OrbitParams, betas, **kwargs) -> tuple[MonodromyReport, MonodromyReport]:
    return (
        monodromy(decoupled_system(params, betas, 1), **kwargs),
        monodromy(decoupled_system(params, betas, 2), **kwargs),
    )


def kepler_report(params: OrbitParams, **kwargs) -> MonodromyReport:
    return monodromy(kepler_system(params), **kwargs)


def essential_report(params: OrbitParams, betas, **kwargs) -> MonodromyReport:
    return monodromy(essential_system(params, betas), **kwargs)


def full_report(params: OrbitParams, betas, **kwargs) -> MonodromyReport:
    return monodromy(full_system(params, betas), **kwargs)
