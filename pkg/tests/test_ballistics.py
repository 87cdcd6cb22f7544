"""
Tests for the ballistics module.
"""

import numpy as np
import pytest

from jugglespec.ballistics import (
    TAKEOFF,
    apex_height,
    check_heights,
    flight_time,
    ground_state_prehistory,
    predict_touchdown,
    propagate,
    schedule_sequence,
    takeoff_velocity,
)
from jugglespec.config import HandGeometryConfig, TimingConfig
from jugglespec.errors import NeverCrosses, NonPositiveFlightTime, SlotOccupied
from jugglespec.siteswap import SiteswapState, build_graph, random_walk

G = np.array([0.0, 0.0, -9.81])


@pytest.fixture
def timing():
    return TimingConfig()


@pytest.fixture
def geometry():
    return HandGeometryConfig()


class TestFlight:
    """Tests for single-flight ballistics."""

    def test_flight_time(self, timing):
        """Test flight times at the default cycle time and dwell ratio."""
        assert flight_time(3, timing) == pytest.approx(0.48)
        assert flight_time(9, timing) == pytest.approx(1.92)
        assert flight_time(2, timing) == pytest.approx(0.24)

    def test_non_positive_flight_time(self, timing):
        """Test that a 1-throw cannot fly at dwell ratio 0.5."""
        with pytest.raises(NonPositiveFlightTime):
            flight_time(1, timing)
        with pytest.raises(NonPositiveFlightTime):
            check_heights([3, 0, 1], timing)
        check_heights([3, 0, 2], timing)

    def test_round_trip(self):
        """Test that propagating the takeoff velocity lands on the target."""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            p_to = rng.uniform(-1.0, 1.0, 3)
            p_td = rng.uniform(-1.0, 1.0, 3)
            duration = rng.uniform(0.1, 2.0)
            v = takeoff_velocity(p_to, p_td, duration, G)
            assert np.allclose(propagate(p_to, v, duration, G), p_td, atol=1e-9)

    def test_nine_throw_apex(self, timing, geometry):
        """Test the apex height of a 9-throw."""
        v = takeoff_velocity(geometry.takeoff(0), geometry.touchdown(1), flight_time(9, timing), geometry.g)
        assert apex_height(v, geometry.g) == pytest.approx(4.52, abs=0.02)

    def test_apex_rises_with_height(self, timing, geometry):
        """Test that the apex strictly increases with throw height."""
        apexes = []
        for height in range(2, 10):
            catcher = height % 2
            v = takeoff_velocity(geometry.takeoff(0), geometry.touchdown(catcher), flight_time(height, timing), geometry.g)
            apexes.append(geometry.takeoff(0)[2] + apex_height(v, geometry.g))
        assert all(low < high for low, high in zip(apexes, apexes[1:]))

    def test_takeoff_velocity_needs_duration(self):
        """Test that a zero duration is refused."""
        with pytest.raises(ValueError):
            takeoff_velocity(np.zeros(3), np.ones(3), 0.0, G)


class TestPredictTouchdown:
    """Tests for catch-plane crossing prediction."""

    def test_matches_planned_touchdown(self, timing, geometry):
        """Test that the prediction recovers the planned touchdown."""
        duration = flight_time(5, timing)
        p_to, p_td = geometry.takeoff(0), geometry.touchdown(1)
        v = takeoff_velocity(p_to, p_td, duration, G)
        t, p, v_td = predict_touchdown(p_to, v, p_td[2], G)
        assert t == pytest.approx(duration)
        assert np.allclose(p, p_td, atol=1e-9)
        assert np.allclose(v_td, v + G * duration)

    def test_from_mid_flight(self, timing, geometry):
        """Test prediction from a point on the way down."""
        duration = flight_time(3, timing)
        p_to, p_td = geometry.takeoff(0), geometry.touchdown(1)
        v = takeoff_velocity(p_to, p_td, duration, G)
        p_mid = propagate(p_to, v, 0.4, G)
        v_mid = v + G * 0.4
        t, p, _ = predict_touchdown(p_mid, v_mid, 0.0, G)
        assert t == pytest.approx(duration - 0.4)
        assert np.allclose(p, p_td, atol=1e-9)

    def test_never_crosses(self):
        """Test a ball whose apex stays below the plane."""
        with pytest.raises(NeverCrosses):
            predict_touchdown(np.array([0.0, 0.0, -1.0]), np.array([0.0, 0.0, -1.0]), 0.0, G)

    def test_gravity_must_point_down(self):
        """Test that upward gravity is refused."""
        with pytest.raises(ValueError):
            predict_touchdown(np.zeros(3), np.array([0.0, 0.0, 1.0]), 0.0, -G)


class TestSchedule:
    """Tests for contact-switch schedules."""

    def test_cascade(self, timing, geometry):
        """Test ball identities, hands and times of a three-ball cascade."""
        schedule = schedule_sequence([3] * 6, timing, geometry, initial_state=SiteswapState.ground(3, 3))
        assert len(schedule.flights) == 6
        assert [f.ball_id for f in schedule.flights] == [0, 1, 2, 0, 1, 2]
        assert [f.takeoff.hand for f in schedule.flights] == [0, 1, 0, 1, 0, 1]
        first = schedule.flights[0]
        assert first.touchdown.hand == 1
        assert first.touchdown.beat == 3
        assert first.touchdown.time == pytest.approx(first.takeoff.time + 0.48)
        assert schedule.incoming_height(3) == 3
        assert schedule.flight_landing_at(3) is first
        assert schedule.initial_ball_at(1) == 1
        assert schedule.hands() == [0, 1, 0, 1, 0, 1]
        assert schedule.last_beat == 5

    def test_flight_positions(self, timing, geometry):
        """Test that each flight starts and ends at its contact points."""
        schedule = schedule_sequence([4, 2, 3], timing, geometry, initial_state=SiteswapState.ground(3, 4))
        for flight in schedule.flights:
            assert np.allclose(flight.position(flight.takeoff.time), flight.takeoff.position)
            assert np.allclose(flight.position(flight.touchdown.time), flight.touchdown.position, atol=1e-9)

    def test_illegal_sequence(self, timing, geometry):
        """Test that an illegal throw raises while scheduling."""
        with pytest.raises(SlotOccupied):
            schedule_sequence([2], timing, geometry, initial_state=SiteswapState.ground(3, 3))

    def test_beat_times(self, timing, geometry):
        """Test beat times when the schedule starts before beat zero."""
        throws = ground_state_prehistory(3) + [3, 3]
        schedule = schedule_sequence(
            throws, timing, geometry, start_time=-0.72, initial_state=SiteswapState.ground(3, 3), first_beat=-3,
        )
        assert schedule.time_of(0) == pytest.approx(0.0)
        assert schedule.throw_at(-3) == 3
        assert schedule.throw_at(10) == 0
        assert schedule.hand_of(-1) == 1

    def test_switches_sorted(self, timing, geometry):
        """Test that contact switches come out in time order."""
        schedule = schedule_sequence([5, 3, 4], timing, geometry,
                                     initial_state=SiteswapState.ground(4, 5))
        times = [s.time for s in schedule.switches()]
        assert times == sorted(times)
        assert sum(s.kind == TAKEOFF for s in schedule.switches()) == 3
        assert len(schedule.to_records()) == 6

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_no_hand_holds_two_balls(self, timing, geometry, seed):
        """Test that dwell intervals of one hand never overlap over a random walk."""
        graph = build_graph(9, 5)
        throws = random_walk(graph, graph.ground_state, 400, seed)
        schedule = schedule_sequence(throws, timing, geometry, initial_state=graph.ground_state)
        holds = {0: [], 1: []}
        for ball in range(schedule.ball_count):
            flights = sorted(schedule.flights_of(ball), key=lambda f: f.takeoff.time)
            for caught, thrown in zip(flights, flights[1:]):
                assert caught.touchdown.hand == thrown.takeoff.hand
                assert caught.touchdown.time < thrown.takeoff.time
                holds[thrown.takeoff.hand].append((caught.touchdown.time, thrown.takeoff.time))
        assert holds[0] and holds[1]
        for intervals in holds.values():
            intervals.sort()
            for (_, released), (caught, _) in zip(intervals, intervals[1:]):
                assert released <= caught + 1e-12

    def test_prehistory(self):
        """Test the cascade prehistory of the ground state."""
        assert ground_state_prehistory(1) == []
        assert ground_state_prehistory(3) == [3, 3, 3]
