"""
Tests for the trajectory module.
"""

import numpy as np
import pytest

from jugglespec.errors import OutOfDomain
from jugglespec.trajectory import (
    HandNormalSchedule,
    JerkTrajectory,
    boundary_terms,
    jerk_basis,
    rollout,
    slerp,
)


@pytest.fixture
def trajectory():
    rng = np.random.default_rng(3)
    return JerkTrajectory(
        t0=0.5,
        dt=0.02,
        p0=np.array([0.35, 0.0, 0.0]),
        v0=np.array([-0.5, 0.0, 2.3]),
        a0=np.array([0.0, 0.0, -9.81]),
        jerks=rng.normal(scale=200.0, size=(24, 3)),
    )


class TestJerkTrajectory:
    """Tests for piecewise-constant-jerk rollout."""

    def test_zero_jerk_is_constant_acceleration(self):
        """Test closed-form kinematics without jerk."""
        p0, v0, a0 = np.array([0.1, 0.2, 0.3]), np.array([1.0, 0.0, -1.0]), np.array([0.0, 2.0, -9.81])
        traj = JerkTrajectory(0.0, 0.05, p0, v0, a0, np.zeros((10, 3)))
        p, v, a = rollout(traj, 0.37)
        assert np.allclose(p, p0 + v0 * 0.37 + a0 * 0.37**2 / 2)
        assert np.allclose(v, v0 + a0 * 0.37)
        assert np.allclose(a, a0)

    def test_rollout_matches_knots(self, trajectory):
        """Test that rollout at segment boundaries reproduces the knots."""
        P, V, A = trajectory.knots
        for k in range(trajectory.n_steps + 1):
            p, v, a = rollout(trajectory, trajectory.t0 + k * trajectory.dt)
            assert np.allclose(p, P[k])
            assert np.allclose(v, V[k])
            assert np.allclose(a, A[k])

    def test_sample_matches_rollout(self, trajectory):
        """Test that vectorised sampling agrees with scalar rollout."""
        times = np.linspace(trajectory.t0, trajectory.t_end, 37)
        pos, vel, acc = trajectory.sample(times)
        for i, t in enumerate(times):
            p, v, a = rollout(trajectory, t)
            assert np.allclose(pos[i], p)
            assert np.allclose(vel[i], v)
            assert np.allclose(acc[i], a)

    def test_out_of_domain(self, trajectory):
        """Test that times outside the span raise."""
        with pytest.raises(OutOfDomain):
            rollout(trajectory, trajectory.t0 - 0.01)
        with pytest.raises(OutOfDomain):
            trajectory.sample([trajectory.t_end + 0.01])

    def test_basis_reproduces_rollout(self, trajectory):
        """Test that the affine jerk maps give the same kinematics."""
        times = np.linspace(trajectory.t0, trajectory.t_end, 29)
        Rp, Rv, Ra = jerk_basis(times, trajectory.t0, trajectory.dt, trajectory.n_steps)
        op, ov, oa = boundary_terms(times, trajectory.t0, trajectory.p0, trajectory.v0, trajectory.a0)
        pos, vel, acc = trajectory.sample(times)
        assert np.allclose(op + Rp @ trajectory.jerks, pos)
        assert np.allclose(ov + Rv @ trajectory.jerks, vel)
        assert np.allclose(oa + Ra @ trajectory.jerks, acc)

    def test_end_state_and_shift(self, trajectory):
        """Test end state and time shifting."""
        p, v, a = trajectory.end_state()
        assert np.allclose(p, rollout(trajectory, trajectory.t_end)[0])
        shifted = trajectory.shifted(2.0)
        assert shifted.t_end == pytest.approx(2.0 + trajectory.duration)
        assert np.allclose(shifted.end_state()[1], v)

    def test_records(self, trajectory):
        """Test one exported record per knot."""
        records = trajectory.to_records(HandNormalSchedule.constant([0.0, 0.0, 1.0]))
        assert len(records) == trajectory.n_steps + 1
        assert records[0]["t"] == pytest.approx(trajectory.t0)
        assert records[-1]["n_hat"] == [0.0, 0.0, 1.0]
        assert trajectory.peak_speed() >= np.linalg.norm(trajectory.v0)


def _integrate_fine(traj, substeps=1000):
    """Knot states from an independent fixed-step integration of the jerk sequence."""
    h = traj.dt / substeps
    p, v, a = (np.array(x, dtype=float) for x in (traj.p0, traj.v0, traj.a0))
    knots = [(p.copy(), v.copy(), a.copy())]
    for j in traj.jerks:
        for _ in range(substeps):
            p = p + v * h + a * (h * h / 2) + j * (h**3 / 6)
            v = v + a * h + j * (h * h / 2)
            a = a + j * h
        knots.append((p.copy(), v.copy(), a.copy()))
    return knots


class TestRolloutProperties:
    """Seeded property checks of the closed-form rollout."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_fine_step_integration(self, seed):
        """Test rollout against a thousand-substep integration of each segment."""
        rng = np.random.default_rng(seed)
        traj = JerkTrajectory(
            t0=rng.uniform(-1.0, 1.0),
            dt=0.02,
            p0=rng.normal(scale=0.3, size=3),
            v0=rng.normal(scale=2.0, size=3),
            a0=rng.normal(scale=10.0, size=3),
            jerks=rng.normal(scale=200.0, size=(8, 3)),
        )
        for k, (p, v, a) in enumerate(_integrate_fine(traj)):
            rp, rv, ra = rollout(traj, traj.t0 + k * traj.dt)
            assert np.max(np.abs(rp - p)) < 1e-9
            assert np.max(np.abs(rv - v)) < 1e-9
            assert np.max(np.abs(ra - a)) < 1e-9

    def test_constant_jerk_from_rest(self):
        """Test p = j t^3 / 6 for a constant jerk applied from rest."""
        rng = np.random.default_rng(5)
        for _ in range(20):
            j = rng.normal(scale=100.0, size=3)
            n = int(rng.integers(1, 30))
            traj = JerkTrajectory(0.0, 0.01, np.zeros(3), np.zeros(3), np.zeros(3), np.tile(j, (n, 1)))
            t = rng.uniform(0.0, traj.duration)
            p, v, a = rollout(traj, t)
            assert np.allclose(p, j * t**3 / 6, rtol=1e-10, atol=1e-12)
            assert np.allclose(v, j * t**2 / 2, rtol=1e-10, atol=1e-12)
            assert np.allclose(a, j * t, rtol=1e-10, atol=1e-12)

    def test_superposition(self):
        """Test that jerk contributions add while the initial state counts once."""
        rng = np.random.default_rng(8)
        for _ in range(10):
            state = [rng.normal(size=3) for _ in range(3)]
            j1 = rng.normal(scale=150.0, size=(12, 3))
            j2 = rng.normal(scale=150.0, size=(12, 3))
            both = JerkTrajectory(0.2, 0.015, *state, j1 + j2)
            first = JerkTrajectory(0.2, 0.015, *state, j1)
            second = JerkTrajectory(0.2, 0.015, np.zeros(3), np.zeros(3), np.zeros(3), j2)
            for t in rng.uniform(both.t0, both.t_end, size=8):
                combined = rollout(both, t)
                for total, a, b in zip(combined, rollout(first, t), rollout(second, t)):
                    assert np.allclose(total, a + b, atol=1e-12)


class TestHandNormalSchedule:
    """Tests for slerped hand normals."""

    def test_slerp_endpoints(self):
        """Test that slerp hits both ends and stays unit length."""
        a = np.array([0.0, 0.0, 1.0])
        b = np.array([1.0, 0.0, 0.0])
        assert np.allclose(slerp(a, b, 0.0), a)
        assert np.allclose(slerp(a, b, 1.0), b)
        assert np.linalg.norm(slerp(a, b, 0.3)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            slerp(a, -a, 0.5)

    def test_held_outside_anchors(self):
        """Test that normals are held before the first and after the last anchor."""
        schedule = HandNormalSchedule(np.array([0.0, 1.0]), np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))
        assert np.allclose(schedule.at(-1.0), [0.0, 0.0, 1.0])
        assert np.allclose(schedule.at(2.0), np.array([0.0, 1.0, 1.0]) / np.sqrt(2))
        assert np.allclose(schedule.rate(2.0), 0.0)

    def test_rate_matches_finite_difference(self):
        """Test the analytic normal rate."""
        schedule = HandNormalSchedule(
            np.array([0.0, 0.2, 0.5]), np.array([[0.0, 0.3, 1.0], [0.0, 0.0, 1.0], [0.4, 0.0, 1.0]]),
        )
        for t in [0.05, 0.13, 0.3, 0.41]:
            h = 1e-6
            numeric = (schedule.at(t + h) - schedule.at(t - h)) / (2 * h)
            assert np.allclose(schedule.rate(t), numeric, atol=1e-5)

    def test_vectorised_sampling(self):
        """Test that batch sampling matches the scalar methods."""
        schedule = HandNormalSchedule(
            np.array([0.0, 0.2, 0.5]), np.array([[0.0, 0.3, 1.0], [0.0, 0.0, 1.0], [0.4, 0.0, 1.0]]),
        )
        times = np.array([-0.1, 0.0, 0.1, 0.2, 0.35, 0.5, 0.7])
        normals, rates = schedule.sample_with_rates(times)
        for i, t in enumerate(times):
            assert np.allclose(normals[i], schedule.at(t))
            assert np.allclose(rates[i], schedule.rate(t))

    def test_invalid_anchors(self):
        """Test that anchors must be increasing and match in number."""
        with pytest.raises(ValueError):
            HandNormalSchedule(np.array([0.0, 0.0]), np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))
        with pytest.raises(ValueError):
            HandNormalSchedule(np.array([0.0]), np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))
