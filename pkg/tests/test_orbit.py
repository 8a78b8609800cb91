import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ere4.errors import CollisionDetected
from ere4.linsys import OrbitParams
from ere4.orbit import (
    PhaseState,
    angular_momentum,
    energy,
    ere_state,
    homographic_deviation,
    integrate_nbody,
    kepler_period,
    solve_kepler,
    true_anomaly,
    write_trajectory_csv,
)


class TestKepler:
    def test_trivial_cases(self):
        assert solve_kepler(0.0, 0.7) == 0.0
        assert solve_kepler(1.234, 0.0) == 1.234

    def test_reference_value(self):
        E = solve_kepler(math.pi / 2, 0.5)
        assert E - 0.5 * math.sin(E) == pytest.approx(math.pi / 2, abs=1e-13)
        assert E == pytest.approx(2.0209799380897704, abs=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-50, 50), st.floats(0, 0.99))
    def test_residual(self, M, e):
        E = solve_kepler(M, e)
        assert abs(E - e * math.sin(E) - M) <= 1e-13 * max(1.0, abs(M))

    def test_bad_eccentricity(self):
        with pytest.raises(ValueError):
            solve_kepler(1.0, 1.0)

    @pytest.mark.parametrize("E, want", [(0.0, 0.0), (math.pi, math.pi), (2 * math.pi, 2 * math.pi)])
    def test_true_anomaly_fixed_points(self, E, want):
        assert true_anomaly(E, 0.6) == pytest.approx(want, abs=1e-12)

    def test_true_anomaly_monotone(self):
        th = [true_anomaly(E, 0.8) for E in np.linspace(-7, 7, 500)]
        assert np.all(np.diff(th) > 0)


class TestEREState:
    def test_circular_start(self, square):
        cc = square[0]
        s = ere_state(0.0, cc, OrbitParams(0.0))
        np.testing.assert_allclose(s.positions[:, 0] + 1j * s.positions[:, 1], cc.positions, atol=1e-15)
        speed = np.hypot(*(s.momenta / cc.masses[:, None]).T)
        np.testing.assert_allclose(speed, math.sqrt(cc.mu) * np.abs(cc.positions), rtol=1e-14)

    @pytest.mark.parametrize("e", [0.1, 0.5, 0.9])
    def test_pericenter_start(self, square, e):
        cc = square[0]
        s = ere_state(0.0, cc, OrbitParams(e, 2.0))
        np.testing.assert_allclose(np.hypot(*s.positions.T), 2.0 / (1 + e) * np.abs(cc.positions), rtol=1e-14)

    @pytest.mark.parametrize("e", [0.0, 0.3, 0.7])
    def test_period(self, any_config, e):
        cc = any_config[0]
        pr = OrbitParams(e)
        T = kepler_period(cc.mu, pr.p, e)
        for t in (0.0, 0.37 * T):
            a, b = ere_state(t, cc, pr), ere_state(t + T, cc, pr)
            np.testing.assert_allclose(b.as_vector(), a.as_vector(), atol=1e-9)

    @pytest.mark.parametrize("e", [0.0, 0.3, 0.8])
    def test_conserved_quantities(self, triangle, e):
        cc = triangle[0]
        pr = OrbitParams(e)
        T = kepler_period(cc.mu, pr.p, e)
        states = [ere_state(t, cc, pr) for t in np.linspace(0, T, 60)]
        E = [energy(s, cc.masses) for s in states]
        L = [angular_momentum(s) for s in states]
        assert np.ptp(E) <= 1e-10
        assert np.ptp(L) <= 1e-10
        for s in states:
            np.testing.assert_allclose(s.total_momentum(), 0, atol=1e-14)


class TestIntegrator:
    def test_two_body_circular_period(self):
        m = np.array([0.5, 0.5])
        # separation 1, total mass 1: angular rate 1, period 2 pi
        s0 = PhaseState([-0.5, 0, 0.5, 0], [0, -0.25, 0, 0.25])
        T = 2 * math.pi
        traj = integrate_nbody(s0, m, T, t_eval=[0.0, T / 2, T])
        np.testing.assert_allclose(traj.state(2).as_vector(), s0.as_vector(), atol=1e-8)
        np.testing.assert_allclose(traj.state(1).Q, -s0.Q, atol=1e-8)

    def test_homographic_square(self, square):
        cc = square[0]
        pr = OrbitParams(0.3)
        T = kepler_period(cc.mu, pr.p, pr.e)
        traj = integrate_nbody(ere_state(0.0, cc, pr), cc.masses, T)
        assert homographic_deviation(traj, cc, pr) <= 1e-7
        E0 = energy(traj.state(0), cc.masses)
        drift = max(abs(energy(s, cc.masses) - E0) for s in traj.states()) / abs(E0)
        assert drift <= 1e-9
        P = np.array([s.total_momentum() for s in traj.states()])
        assert np.max(np.abs(P)) <= 1e-10

    def test_rotation_invariance(self, triangle):
        cc = triangle[0]
        pr = OrbitParams(0.4)
        T = 0.5 * kepler_period(cc.mu, pr.p, pr.e)
        devs = []
        for phase in (0.0, 1.3):
            traj = integrate_nbody(ere_state(0.0, cc, pr, phase), cc.masses, T, n_samples=101)
            devs.append(homographic_deviation(traj, cc, pr, phase))
        assert abs(devs[0] - devs[1]) <= 1e-10

    def test_collision(self):
        s0 = PhaseState([-0.5, 0, 0.5, 0], [0, 0, 0, 0])
        with pytest.raises(CollisionDetected):
            integrate_nbody(s0, [0.5, 0.5], 5.0)

    def test_dense_output(self, square):
        cc = square[0]
        pr = OrbitParams(0.2)
        traj = integrate_nbody(ere_state(0.0, cc, pr), cc.masses, 1.0, dense_output=True)
        np.testing.assert_allclose(traj.at(0.5).Q, ere_state(0.5, cc, pr).Q, atol=1e-8)

    def test_mass_shape(self, square):
        with pytest.raises(ValueError):
            integrate_nbody(ere_state(0.0, square[0], OrbitParams(0.0)), [1, 1], 1.0)


def test_phase_state_validation():
    with pytest.raises(ValueError):
        PhaseState([0, 1, 2], [0, 1, 2])


def test_trajectory_csv(tmp_path, square):
    cc = square[0]
    traj = integrate_nbody(ere_state(0.0, cc, OrbitParams(0.1)), cc.masses, 0.5, n_samples=5)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t"] + [f"q{i}{c}" for i in range(1, 5) for c in "xy"] + [
        f"p{i}{c}" for i in range(1, 5) for c in "xy"
    ]
    assert len(rows) == 6
    assert float(rows[-1][0]) == 0.5
