"""
Ballistic flight planning.

Turns a throw sequence into timed contact switches (takeoffs and touchdowns)
under constant gravity and zero drag. Beat ``b`` is thrown at
``start_time + (b - first_beat) * tau / 2`` by hand ``b % 2`` (0 is the right
hand) and a ball due at beat ``j`` touches down ``r * tau`` before that beat.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from jugglespec.config import HandGeometryConfig, TimingConfig
from jugglespec.errors import NeverCrosses, NonPositiveFlightTime
from jugglespec.siteswap import SiteswapState, step_state

TAKEOFF = "takeoff"
TOUCHDOWN = "touchdown"


@dataclass(frozen=True, eq=False)
class ContactSwitch:
    """A ball leaving (takeoff) or reaching (touchdown) a hand."""

    kind: str
    time: float
    position: np.ndarray
    velocity: np.ndarray
    hand: int
    ball_id: int
    beat: int
    height: int

    def to_record(self) -> Dict[str, Any]:
        return {
            "t": self.time,
            "kind": self.kind,
            "hand": self.hand,
            "ball": self.ball_id,
            "p": [float(c) for c in self.position],
            "v": [float(c) for c in self.velocity],
            "height": self.height,
        }


@dataclass(frozen=True, eq=False)
class BallFlight:
    """One free flight between a takeoff and the matching touchdown."""

    takeoff: ContactSwitch
    touchdown: ContactSwitch
    flight_time: float
    throw_height: int
    gravity: np.ndarray

    @property
    def ball_id(self) -> int:
        return self.takeoff.ball_id

    def position(self, t: float) -> np.ndarray:
        return propagate(self.takeoff.position, self.takeoff.velocity, t - self.takeoff.time, self.gravity)

    def velocity(self, t: float) -> np.ndarray:
        return self.takeoff.velocity + self.gravity * (t - self.takeoff.time)


def flight_time(height: int, timing: TimingConfig) -> float:
    """
    Flight time of an ``height``-throw: ``(a - 2r) * tau / 2``.

    Raises:
        NonPositiveFlightTime: If the height cannot be thrown at this timing
    """
    value = (height - 2 * timing.dwell_ratio) * timing.cycle_time / 2
    if value <= 0:
        raise NonPositiveFlightTime(height, value)
    return value


def check_heights(heights: Iterable[int], timing: TimingConfig) -> None:
    """Raise NonPositiveFlightTime for the first positive height that cannot fly."""
    for height in heights:
        if height > 0:
            flight_time(height, timing)


def takeoff_velocity(p_takeoff: np.ndarray, p_touchdown: np.ndarray, duration: float, g: np.ndarray) -> np.ndarray:
    """Velocity that carries a ball from ``p_takeoff`` to ``p_touchdown`` in ``duration`` seconds."""
    if duration <= 0:
        raise ValueError("flight duration must be positive")
    p_takeoff = np.asarray(p_takeoff, dtype=float)
    p_touchdown = np.asarray(p_touchdown, dtype=float)
    return (p_touchdown - p_takeoff - 0.5 * np.asarray(g, dtype=float) * duration**2) / duration


def propagate(position: np.ndarray, velocity: np.ndarray, duration: float, g: np.ndarray) -> np.ndarray:
    return np.asarray(position, dtype=float) + np.asarray(velocity, dtype=float) * duration + 0.5 * np.asarray(g, dtype=float) * duration**2


def apex_height(velocity: np.ndarray, g: np.ndarray) -> float:
    """Rise of the apex above the takeoff point."""
    vz = float(velocity[2])
    if vz <= 0:
        return 0.0
    return vz * vz / (2 * abs(float(g[2])))


def predict_touchdown(
    position: np.ndarray,
    velocity: np.ndarray,
    catch_height: float,
    g: np.ndarray,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Predict where a free ball crosses the catch plane on its way down.

    Args:
        position: Current ball position
        velocity: Current ball velocity
        catch_height: z of the catch plane
        g: Gravity vector (z component must be negative)

    Returns:
        Tuple of (time from now, touchdown position, touchdown velocity)

    Raises:
        NeverCrosses: If the ball does not reach the plane going down
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    g = np.asarray(g, dtype=float)
    if not g[2] < 0:
        raise ValueError("gravity must have a negative z component")

    a = 0.5 * g[2]
    b = velocity[2]
    c = position[2] - catch_height
    disc = b * b - 4 * a * c
    if disc < 0:
        raise NeverCrosses(f"ball apex stays below the catch plane at z={catch_height}")
    root = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(root, b))
    candidates = [q / a]
    if q != 0:
        candidates.append(c / q)
    t = max(candidates)
    if t < -1e-12:
        raise NeverCrosses("ball has already passed below the catch plane")
    t = max(t, 0.0)
    return t, propagate(position, velocity, t, g), velocity + g * t


@dataclass(frozen=True, eq=False)
class Schedule:
    """Contact switches of a throw sequence with ball identities."""

    timing: TimingConfig
    geometry: HandGeometryConfig
    first_beat: int
    start_time: float
    throws: Tuple[int, ...]
    initial_state: SiteswapState
    flights: Tuple[BallFlight, ...]
    ball_count: int
    _landing: Dict[int, BallFlight] = field(repr=False, default_factory=dict)
    _initial_balls: Dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def last_beat(self) -> int:
        return self.first_beat + len(self.throws) - 1

    def time_of(self, beat: int) -> float:
        return self.start_time + (beat - self.first_beat) * self.timing.beat_time

    @staticmethod
    def hand_of(beat: int) -> int:
        return beat % 2

    def throw_at(self, beat: int) -> int:
        index = beat - self.first_beat
        if 0 <= index < len(self.throws):
            return self.throws[index]
        return 0

    def flight_landing_at(self, beat: int) -> Optional[BallFlight]:
        return self._landing.get(beat)

    def incoming_height(self, beat: int) -> Optional[int]:
        """Height of the throw that lands at ``beat``, None if that ball was never thrown here."""
        flight = self._landing.get(beat)
        return flight.throw_height if flight is not None else None

    def initial_ball_at(self, beat: int) -> Optional[int]:
        """Ball id of a ball that is due at ``beat`` without a recorded flight."""
        return self._initial_balls.get(beat)

    def flights_of(self, ball_id: int) -> List[BallFlight]:
        return [f for f in self.flights if f.ball_id == ball_id]

    def hands(self) -> List[int]:
        """Hand assignment per scheduled beat."""
        return [self.hand_of(self.first_beat + k) for k in range(len(self.throws))]

    def switches(self) -> List[ContactSwitch]:
        events = [f.takeoff for f in self.flights] + [f.touchdown for f in self.flights]
        return sorted(events, key=lambda e: (e.time, e.kind == TAKEOFF, e.ball_id))

    def to_records(self) -> List[Dict[str, Any]]:
        return [switch.to_record() for switch in self.switches()]


def schedule_sequence(
    throws: Sequence[int],
    timing: TimingConfig,
    geometry: HandGeometryConfig,
    start_time: float = 0.0,
    *,
    initial_state: SiteswapState,
    first_beat: int = 0,
) -> Schedule:
    """
    Build the contact-switch schedule of a throw sequence.

    Args:
        throws: Throw heights, the first one made at ``first_beat``
        timing: Beat timing
        geometry: Takeoff and touchdown points
        start_time: Time of the first beat
        initial_state: Juggling state before the first throw
        first_beat: Beat index of the first throw

    Returns:
        Schedule: Flights with ball identities

    Raises:
        TransitionError: If the sequence is not legal from ``initial_state``
        NonPositiveFlightTime: If a height cannot be thrown at this timing
    """
    g = geometry.g
    landing_ball: Dict[int, int] = {}
    initial_balls: Dict[int, int] = {}
    next_id = 0
    for slot in range(initial_state.width):
        if initial_state.occupied(slot):
            landing_ball[first_beat + slot] = next_id
            initial_balls[first_beat + slot] = next_id
            next_id += 1

    flights: List[BallFlight] = []
    landing_flight: Dict[int, BallFlight] = {}
    state = initial_state
    for k, throw in enumerate(throws):
        beat = first_beat + k
        state = step_state(state, throw)
        if throw == 0:
            continue
        ball = landing_ball.pop(beat)
        hand = beat % 2
        dest = (beat + throw) % 2
        duration = flight_time(throw, timing)
        t_takeoff = start_time + k * timing.beat_time
        p_takeoff = geometry.takeoff(hand)
        p_touchdown = geometry.touchdown(dest)
        v_takeoff = takeoff_velocity(p_takeoff, p_touchdown, duration, g)
        flight = BallFlight(
            takeoff=ContactSwitch(TAKEOFF, t_takeoff, p_takeoff, v_takeoff, hand, ball, beat, throw),
            touchdown=ContactSwitch(
                TOUCHDOWN, t_takeoff + duration, p_touchdown, v_takeoff + g * duration, dest, ball, beat + throw, throw
            ),
            flight_time=duration,
            throw_height=throw,
            gravity=g,
        )
        flights.append(flight)
        landing_flight[beat + throw] = flight
        landing_ball[beat + throw] = ball

    return Schedule(
        timing=timing,
        geometry=geometry,
        first_beat=first_beat,
        start_time=start_time,
        throws=tuple(throws),
        initial_state=initial_state,
        flights=tuple(flights),
        ball_count=initial_state.ball_count,
        _landing=landing_flight,
        _initial_balls=initial_balls,
    )


def ground_state_prehistory(ball_count: int) -> List[int]:
    """Uniform-cascade throws that leave the ground state where it started.

    One ball has nothing to cascade with, so its prehistory is empty.
    """
    if ball_count < 2:
        return []
    return [ball_count] * ball_count
