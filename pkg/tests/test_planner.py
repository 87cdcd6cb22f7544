"""
Tests for the planner module.
"""

import numpy as np
import pytest

from jugglespec.cache.memory_cache import MemoryCycleCache
from jugglespec.config import JuggleConfig, OptimizerConfig
from jugglespec.errors import TrajectoryGap
from jugglespec.harness import CATCH_HEIGHTS, PREVIOUS_HEIGHTS, structurally_possible
from jugglespec.planner import ACCELERATION_ENVELOPE, SPEED_ENVELOPE, Planner, cycle_spec_for_heights
from jugglespec.simulator import initialize_from_ground_state


@pytest.fixture(scope="module")
def config():
    return JuggleConfig()


@pytest.fixture(scope="module")
def cascade(config):
    _, schedule = initialize_from_ground_state(3, config.timing, config.geometry, throws=[3] * 6)
    return schedule


@pytest.fixture(scope="module")
def cascade_plan(config, cascade):
    return Planner(config, MemoryCycleCache()).plan_schedule(cascade)


class TestPlanSchedule:
    """Tests for planning both hands of a schedule."""

    def test_cycles_per_hand(self, cascade_plan):
        """Test that each hand plans one cycle per own beat."""
        assert [c.beat for c in cascade_plan.hands[0].cycles] == [0, 2, 4]
        assert [c.beat for c in cascade_plan.hands[1].cycles] == [1, 3, 5]
        assert cascade_plan.hands[0].t_start == pytest.approx(-0.48)
        assert cascade_plan.t_start == pytest.approx(-0.24)
        assert len(cascade_plan.cycles()) == 6

    def test_heights_recorded(self, cascade_plan):
        """Test the height triple of every cascade cycle."""
        for cycle in cascade_plan.cycles():
            assert (cycle.previous, cycle.incoming, cycle.target) == (3, 3, 3)

    def test_continuity(self, cascade_plan):
        """Test that consecutive cycles of a hand join in position, velocity and acceleration."""
        for hand_plan in cascade_plan.hands.values():
            for before, after in zip(hand_plan.cycles, hand_plan.cycles[1:]):
                p, v, a = before.trajectory.end_state()
                assert after.t0 == pytest.approx(before.t_end)
                assert np.allclose(p, after.spec.p0, atol=1e-6)
                assert np.allclose(v, after.spec.v0, atol=1e-6)
                assert np.allclose(a, after.spec.a0, atol=1e-6)

    def test_converged_and_within_envelope(self, cascade_plan):
        """Test that the cascade plans cleanly."""
        assert cascade_plan.all_converged()
        envelope = cascade_plan.envelope()
        assert envelope["within_envelope"]
        assert envelope["peak_speed"] < SPEED_ENVELOPE
        assert envelope["peak_acceleration"] < ACCELERATION_ENVELOPE
        assert len(cascade_plan.solve_times()) == 6

    def test_repeated_cycles_hit_cache(self, cascade_plan):
        """Test that identical cycles are solved once per hand."""
        assert cascade_plan.cache_misses == 2
        assert cascade_plan.cache_hits == 4

    def test_shared_cache_across_runs(self, config, cascade):
        """Test that a second plan with the same cache is served entirely from it."""
        cache = MemoryCycleCache()
        Planner(config, cache).plan_schedule(cascade)
        again = Planner(config, cache).plan_schedule(cascade)
        assert again.cache_misses == 0
        assert again.cache_hits == 6

    def test_mock_cache_is_filled(self, config, cascade, mock_cache_manager):
        """Test that every solved cycle is stored."""
        plan = Planner(config, mock_cache_manager).plan_schedule(cascade, last_beat=1)
        assert plan.cache_hits == 0
        assert mock_cache_manager.set.call_count == 2

    def test_trajectory_records(self, cascade_plan):
        """Test the exported knot records."""
        records = cascade_plan.trajectory_records()
        assert records
        assert {"t", "p", "v", "a", "j"} <= set(records[0])


class TestHandPlan:
    """Tests for querying a hand plan."""

    def test_state_and_normal(self, cascade_plan):
        """Test looking up the hand state inside the plan."""
        hand = cascade_plan.hands[0]
        p, v, a = hand.state(0.1)
        assert p.shape == (3,)
        assert np.linalg.norm(hand.normal(0.1)) == pytest.approx(1.0)
        assert hand.normal_rate(0.1).shape == (3,)

    def test_gap(self, cascade_plan):
        """Test that times outside the plan raise."""
        with pytest.raises(TrajectoryGap):
            cascade_plan.hands[0].cycle_at(100.0)
        with pytest.raises(TrajectoryGap):
            cascade_plan.hands[1].cycle_at(-5.0)


class TestSolveSpec:
    """Tests for stand-alone cycle solves."""

    def test_solve_triple(self, config):
        """Test solving a single height triple without a cache."""
        planner = Planner(config)
        traj, report, hit = planner.solve_spec(cycle_spec_for_heights(config, 0, 3, 5, 5), 0)
        assert not hit
        assert report.converged
        assert traj.n_steps == config.optimizer.n_steps

    def test_refinement_delta(self, config, cascade, cascade_plan):
        """Test that a finer jerk grid barely moves the takeoff velocity."""
        delta = Planner(config).refinement_delta(cascade, cascade_plan.hands[0].cycles[1], n_steps=48)
        assert delta < 1e-3


class TestLongRuns:
    """Acceptance-scale planning checks."""

    @pytest.mark.slow
    def test_refinement_from_48_to_96_steps(self, cascade):
        """Test that doubling a 48-step grid moves the takeoff velocity by less than 0.1 mm/s."""
        coarse = JuggleConfig(optimizer=OptimizerConfig(n_steps=48))
        planner = Planner(coarse)
        plan = planner.plan_schedule(cascade)
        assert plan.all_converged()
        for cycle in plan.hands[0].cycles[1:] + plan.hands[1].cycles[1:]:
            assert planner.refinement_delta(cascade, cycle, n_steps=96) < 1e-4

    @pytest.mark.slow
    def test_cascade_envelope(self, config):
        """Test that a long cascade stays below 10 m/s and 400 m/s^2."""
        _, schedule = initialize_from_ground_state(3, config.timing, config.geometry, throws=[3] * 40)
        plan = Planner(config, MemoryCycleCache()).plan_schedule(schedule)
        envelope = plan.envelope()
        assert plan.all_converged()
        assert envelope["peak_speed"] < 10.0
        assert envelope["peak_acceleration"] < 400.0

    @pytest.mark.slow
    def test_nine_throw_cycles_converge(self, config):
        """Test that every possible cycle ending in a 9-throw converges within the envelope."""
        planner = Planner(config)
        triples = [(p, i, 9) for p in PREVIOUS_HEIGHTS for i in CATCH_HEIGHTS if structurally_possible(p, i, 9)]
        assert triples
        for triple in triples:
            traj, report, _ = planner.solve_spec(cycle_spec_for_heights(config, 0, *triple), 0)
            assert report.converged, triple
            assert traj.peak_speed() < SPEED_ENVELOPE
            assert traj.peak_acceleration() < ACCELERATION_ENVELOPE
