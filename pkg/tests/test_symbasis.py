import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ere4.centralconfig import family_seed, normalize, solve_cc
from ere4.cplx import phi_lift
from ere4.errors import CollinearDegeneracy, FGIdentityViolation
from ere4.symbasis import (
    build_basis,
    build_kl,
    compute_betas,
    lifted_unitarity_defect,
    mass_matrix,
    signed_area,
)

from conftest import BETA2_SQUARE, solved


def det_area(p1, p2, p3):
    """(i/4) det[[1, z, conj z], ...] evaluated with a generic determinant."""
    rows = [[1, z, np.conj(z)] for z in (p1, p2, p3)]
    val = 0.25j * np.linalg.det(np.array(rows, dtype=complex))
    assert abs(val.imag) < 1e-12
    return val.real


@pytest.mark.parametrize(
    "pts, want",
    [
        ((0, 1, 1j), 0.5),
        ((0, 1j, 1), -0.5),
        ((0, 1 + 1j, 2 + 2j), 0.0),
    ],
)
def test_signed_area_literals(pts, want):
    assert signed_area(*pts) == pytest.approx(want, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3))
def test_signed_area_matches_determinant(pts):
    assert signed_area(*pts) == pytest.approx(det_area(*pts), abs=1e-11)


def hand_beta(m, a, x, y, mu):
    """(3 / 2mu) sum_{i<j} m_i m_j (a_i-a_j)^2 conj(x_i-x_j) conj(y_i-y_j) / |a_i-a_j|^5."""
    s = 0j
    for i, j in itertools.combinations(range(4), 2):
        d = a[i] - a[j]
        s += m[i] * m[j] * d * d * np.conj(x[i] - x[j]) * np.conj(y[i] - y[j]) / abs(d) ** 5
    return 1.5 * s / mu


class TestKL:
    def test_square_gives_trivial_pair(self, square):
        k, l = build_kl(square[0].config)
        assert (k, l) == (1.0, 0.0)

    def test_collinear_rejected(self):
        cc = solve_cc([1, 1, 1, 1], family_seed("collinear"))
        with pytest.raises(CollinearDegeneracy):
            build_kl(cc.config)
        with pytest.raises(CollinearDegeneracy):
            build_basis(cc)

    def test_k_positive(self, any_config):
        assert any_config[1].k > 0


class TestBasis:
    def test_square_c_entries(self, square):
        cc, basis, _ = square
        np.testing.assert_allclose(np.abs(basis.v4), 1, atol=1e-14)
        assert np.sum(cc.masses * basis.v4**2) == pytest.approx(1, abs=1e-14)
        assert basis.rho == pytest.approx(1 / 16)

    def test_unitarity(self, any_config):
        _, basis, _ = any_config
        assert basis.unitarity_defect() <= 1e-10
        assert lifted_unitarity_defect(basis) <= 1e-10

    def test_ATMA_is_identity(self, any_config):
        _, basis, _ = any_config
        assert basis.symplectic_defect() <= 1e-10

    def test_A_is_the_lift_of_A_tilde(self, any_config):
        _, basis, _ = any_config
        np.testing.assert_allclose(basis.A, phi_lift(basis.A_tilde), atol=0)

    def test_v4_eigenvector(self, any_config):
        cc, basis, _ = any_config
        lam4 = cc.trace_D - cc.mu
        assert np.max(np.abs(cc.D @ basis.v4 - lam4 * basis.v4)) <= 1e-9

    def test_v3_orthogonal_to_v2(self, any_config):
        cc, basis, _ = any_config
        m = cc.masses
        assert abs(np.sum(m * np.conj(basis.v2) * basis.v3)) <= 1e-12
        assert np.sum(m * np.abs(basis.v3) ** 2) == pytest.approx(1, abs=1e-12)

    def test_mass_matrix(self):
        np.testing.assert_array_equal(np.diag(mass_matrix([1, 2, 3, 4])), [1, 1, 2, 2, 3, 3, 4, 4])


class TestBetas:
    def test_square_values(self, square):
        _, _, b = square
        assert b.beta2 == pytest.approx(BETA2_SQUARE, abs=1e-10)
        assert abs(b.beta12) <= 1e-10
        assert abs(b.beta1) <= 1e-12

    def test_beta1_vanishes(self, any_config):
        assert abs(any_config[2].beta1) <= 1e-12

    def test_against_hand_sums(self, any_config):
        cc, basis, b = any_config
        m, a, v3, v4 = cc.masses, cc.positions, basis.v3, basis.v4
        assert b.beta11 == pytest.approx(hand_beta(m, a, v3, v3, cc.mu), abs=1e-12)
        assert b.beta12 == pytest.approx(hand_beta(m, a, v3, v4, cc.mu), abs=1e-12)
        assert b.beta22 == pytest.approx(hand_beta(m, a, v4, v4, cc.mu), abs=1e-12)
        assert b.beta2 == pytest.approx(1 - cc.trace_D / cc.mu, abs=1e-12)

    def test_triangle_is_coupled(self, triangle):
        assert abs(triangle[2].beta12) > 0.1

    def test_eigenvalue_sum(self, any_config):
        cc, basis, b = any_config
        lam3 = -b.beta1 * cc.mu
        lam4 = -b.beta2 * cc.mu
        assert cc.mu + 0 + lam3 + lam4 == pytest.approx(cc.trace_D, abs=1e-10)

    def test_non_central_input_fails_the_cross_check(self):
        w = np.exp(2j * np.pi / 3)
        cc, _, _ = solved("triangle_plus_center")
        # same masses, center displaced: not a central configuration
        fake = type(cc)(**{**cc.__dict__, "config": normalize(cc.masses, [1, w, w * w, 0.2 + 0.1j])})
        with pytest.raises(FGIdentityViolation):
            compute_betas(fake, build_basis(fake))

    @pytest.mark.parametrize("angle", [0.3, 1.7, 4.0])
    def test_rotation_invariance_of_moduli(self, angle):
        cc0, _, b0 = solved("triangle_plus_center")
        seed = normalize(cc0.masses, cc0.positions * np.exp(1j * angle))
        cc = solve_cc(cc0.masses, seed)
        b = compute_betas(cc, build_basis(cc))
        assert b.beta2 == pytest.approx(b0.beta2, abs=1e-10)
        for name in ("beta11", "beta12", "beta22"):
            assert abs(getattr(b, name)) == pytest.approx(abs(getattr(b0, name)), abs=1e-10)

    @pytest.mark.parametrize("perm", [(1, 2, 3, 0), (3, 0, 2, 1), (2, 3, 0, 1)])
    def test_relabeling(self, perm):
        cc0, _, b0 = solved("triangle_plus_center")
        p = list(perm)
        seed = normalize(cc0.masses[p], cc0.positions[p])
        cc = solve_cc(cc0.masses[p], seed)
        b = compute_betas(cc, build_basis(cc))
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvals(cc.D).real), np.sort(np.linalg.eigvals(cc0.D).real), atol=1e-10
        )
        assert b.beta2 == pytest.approx(b0.beta2, abs=1e-10)
        assert abs(b.beta11) == pytest.approx(abs(b0.beta11), abs=1e-10)
