import math

import numpy as np
import pytest
from scipy.linalg import expm

from ere4.errors import StepUnderflow
from ere4.floquet import (
    classify,
    decoupled_reports,
    gauss_legendre_tableau,
    integrate_fundamental,
    monodromy,
    refined_eigenvalues,
    spectrum_autonomous,
    spectrum_distance,
    symplectic_defect,
)
from ere4.linsys import OrbitParams, essential_system, full_system, kepler_system

from conftest import solved

TWO_PI = 2 * math.pi

# monodromy moduli of the equal-mass square essential system at e = 0,
# frozen after the first verified run (they equal exp(2 pi |Re w|) for the
# autonomous exponents w)
GOLDEN_SQUARE_E0 = [
    0.0045138627848714634,
    0.0045138627848714634,
    0.017989286624659925,
    0.017989286624659925,
    55.588641220999214,
    55.588641220999214,
    221.53974271223126,
    221.53974271223126,
]


@pytest.mark.parametrize("s", [1, 2, 3, 4, 5])
def test_tableau_order_conditions(s):
    a, b, c = gauss_legendre_tableau(s)
    np.testing.assert_allclose(a.sum(axis=1), c, atol=1e-14)
    for k in range(2 * s):
        assert b @ c**k == pytest.approx(1 / (k + 1), abs=1e-14)
    for k in range(s):
        np.testing.assert_allclose(a @ c**k, c ** (k + 1) / (k + 1), atol=1e-14)


def test_empty_span_is_identity(square):
    sys_ = essential_system(OrbitParams(0.3), square[2])
    np.testing.assert_array_equal(integrate_fundamental(sys_, (0.0, 0.0)), np.eye(8))


@pytest.mark.parametrize("name", ["square", "triangle_plus_center"])
@pytest.mark.parametrize("kind", ["kepler", "essential", "full"])
def test_circular_case_matches_exponential(name, kind):
    _, _, b = solved(name)
    pr = OrbitParams(0.0)
    sys_ = {"kepler": kepler_system(pr), "essential": essential_system(pr, b), "full": full_system(pr, b)}[kind]
    X = expm(TWO_PI * sys_.J @ sys_.B(0.0))
    M = integrate_fundamental(sys_)
    assert np.max(np.abs(M - X)) <= 1e-9 * max(1.0, np.max(np.abs(X)))


def test_flow_composition(triangle):
    sys_ = essential_system(OrbitParams(0.5), triangle[2])
    whole = integrate_fundamental(sys_, (0.0, TWO_PI))
    first = integrate_fundamental(sys_, (0.0, math.pi))
    second = integrate_fundamental(sys_, (math.pi, TWO_PI))
    np.testing.assert_allclose(second @ first, whole, rtol=0, atol=1e-10 * np.max(np.abs(whole)))


def test_explicit_route_agrees(square):
    sys_ = essential_system(OrbitParams(0.3), square[2])
    g = integrate_fundamental(sys_)
    d = integrate_fundamental(sys_, rtol=1e-12, atol=1e-14, method="dop853")
    assert np.max(np.abs(g - d)) <= 1e-7 * np.max(np.abs(g))


def test_unknown_method(square):
    with pytest.raises(ValueError):
        integrate_fundamental(essential_system(OrbitParams(0.0), square[2]), method="euler")


def test_step_cap(square):
    with pytest.raises(StepUnderflow):
        integrate_fundamental(essential_system(OrbitParams(0.9), square[2]), max_steps=256)


@pytest.mark.parametrize("e", [0.0, 0.3, 0.6, 0.9])
def test_kepler_block_is_degenerate(e):
    rep = monodromy(kepler_system(OrbitParams(e)))
    np.testing.assert_allclose(np.abs(rep.eigenvalues - 1), 0, atol=1e-7)
    assert rep.stability == "degenerate"
    assert rep.accepted


@pytest.mark.parametrize("name", ["square", "rhombus", "triangle_plus_center"])
@pytest.mark.parametrize("e", [0.0, 0.2, 0.5, 0.8])
def test_symplectic_spectrum(name, e):
    rep = monodromy(essential_system(OrbitParams(e), solved(name)[2]))
    lam = rep.eigenvalues
    # a float64 eigensolver resolves |lambda_min| = 1/|lambda_max| only to a
    # relative eps*||M||/|lambda_min| ~ eps*||M||^2
    tol = max(1e-7, 10 * np.finfo(float).eps * np.linalg.norm(rep.matrix, 2) ** 2)
    assert spectrum_distance(lam, 1 / lam, relative=True) <= tol
    assert spectrum_distance(lam, lam.conj(), relative=True) <= 1e-7
    # scale-free form of the defect holds for every case
    assert rep.symplectic_defect / np.linalg.norm(rep.matrix, 2) ** 2 <= 1e-15


@pytest.mark.parametrize(
    "name, e",
    [(n, e) for n in ("square", "rhombus") for e in (0.0, 0.3, 0.6, 0.9)]
    + [("triangle_plus_center", e) for e in (0.0, 0.3, 0.5, 0.7)],
)
def test_quality_gate(name, e):
    rep = monodromy(essential_system(OrbitParams(e), solved(name)[2]))
    assert rep.symplectic_defect <= 1e-8
    assert rep.determinant == pytest.approx(1, abs=1e-8)
    assert rep.accepted


def test_gate_rejects_extreme_growth(triangle):
    # |lambda|max ~ 6e4: rounding error ~ ||M||^2 * eps_ld exceeds the absolute gate
    rep = monodromy(essential_system(OrbitParams(0.8), triangle[2]))
    assert rep.moduli[-1] > 5e4
    assert not rep.accepted


@pytest.mark.parametrize("name, e", [("square", 0.4), ("triangle_plus_center", 0.7)])
def test_tolerance_halving(name, e):
    sys_ = essential_system(OrbitParams(e), solved(name)[2])
    a = monodromy(sys_, rtol=1e-10, atol=1e-12)
    b = monodromy(sys_, rtol=5e-11, atol=5e-13)
    assert spectrum_distance(a.eigenvalues, b.eigenvalues, relative=True) <= 1e-6


def test_golden_square(square):
    rep = monodromy(essential_system(OrbitParams(0.0), square[2]))
    np.testing.assert_allclose(rep.moduli, GOLDEN_SQUARE_E0, rtol=1e-9)
    assert rep.stability == "unstable"


class TestAutonomous:
    def test_requires_circular(self, square):
        with pytest.raises(ValueError):
            spectrum_autonomous(essential_system(OrbitParams(0.1), square[2]))

    @pytest.mark.parametrize("name", ["square", "triangle_plus_center"])
    def test_symmetry_and_exponential(self, name):
        sys_ = essential_system(OrbitParams(0.0), solved(name)[2])
        spec = spectrum_autonomous(sys_)
        w = spec.eigenvalues
        assert spectrum_distance(w, -w) <= 1e-10
        assert spectrum_distance(w, w.conj()) <= 1e-10
        rep = monodromy(sys_)
        assert spectrum_distance(np.exp(TWO_PI * w), rep.eigenvalues, relative=True) <= 1e-8

    def test_square_is_linearly_unstable(self, square):
        spec = spectrum_autonomous(essential_system(OrbitParams(0.0), square[2]))
        assert not spec.purely_imaginary
        assert not spec.linearly_stable


def test_decoupled_union(square):
    pr = OrbitParams(0.45)
    rep = monodromy(essential_system(pr, square[2]))
    d1, d2 = decoupled_reports(pr, square[2])
    assert spectrum_distance(rep.eigenvalues, np.concatenate([d1.eigenvalues, d2.eigenvalues])) <= 1e-7
    assert d1.system_kind == d2.system_kind == "decoupled4"


class TestClassify:
    def rot(self, a):
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])

    def test_stable(self):
        M = np.block([[self.rot(0.3), np.zeros((2, 2))], [np.zeros((2, 2)), self.rot(1.1)]])
        assert classify(M, np.linalg.eigvals(M)) == "spectrally_stable"

    def test_unstable(self):
        M = np.diag([2.0, 0.5, 3.0, 1 / 3])
        assert classify(M, np.linalg.eigvals(M)) == "unstable"

    def test_mixed(self):
        M = np.zeros((4, 4))
        M[:2, :2] = self.rot(0.4)
        M[2:, 2:] = np.diag([2.0, 0.5])
        assert classify(M, np.linalg.eigvals(M)) == "elliptic_hyperbolic_mixed"

    def test_jordan_block(self):
        M = np.array([[1.0, 1.0], [0.0, 1.0]])
        assert classify(M, np.array([1.0, 1.0])) == "degenerate"

    def test_non_semisimple_away_from_one(self):
        R = self.rot(0.7)
        M = np.block([[R, np.eye(2)], [np.zeros((2, 2)), R]])
        assert classify(M, np.linalg.eigvals(M)) == "degenerate"


def test_cluster_refinement():
    eps = 1e-7
    M = np.array([[1.0, 1.0], [eps**2, 1.0]])  # eigenvalues 1 +- eps
    refined, raw, spread = refined_eigenvalues(M, radius=1e-5)
    np.testing.assert_allclose(refined, [1.0, 1.0], atol=1e-14)
    assert spread == pytest.approx(eps, rel=1e-6)
    refined, _, _ = refined_eigenvalues(np.diag([1e-4, 2e-4, 3.0]), radius=1e-3)
    np.testing.assert_allclose(np.sort(refined.real), [1e-4, 2e-4, 3.0])


def test_spectrum_distance_size_mismatch():
    with pytest.raises(ValueError):
        spectrum_distance([1, 2], [1])


def test_symplectic_defect_of_exact_symplectic_matrix():
    S = np.array([[2.0, 0.0], [0.0, 0.5]])
    assert symplectic_defect(S) == 0.0
    assert symplectic_defect(np.eye(2) * 2) == pytest.approx(3.0)
