"""
Deterministic contact simulation of balls juggled by kinematic cone hands.

Balls are spheres under gravity. Hands are funnel cones whose seat point and
axis follow the planned trajectories exactly. Contacts are penalty springs
with implicit normal damping and regularized Coulomb friction, evaluated in
the meridian plane of the ball (two wall contacts plus the mouth rim).
"""

import bisect
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from rich.console import Console

from jugglespec.ballistics import BallFlight, Schedule, ground_state_prehistory, schedule_sequence
from jugglespec.config import ContactConfig, HAND_NAMES, HandGeometryConfig, JuggleConfig, TimingConfig
from jugglespec.errors import TrajectoryGap
from jugglespec.planner import HandPlan, SchedulePlan
from jugglespec.siteswap import SiteswapState, replay

console = Console(stderr=True)

CATCH = "catch"
DROP = "drop"
THROW = "throw"
PREMATURE_CONTACT = "premature_contact"
PROXIMITY = "proximity"

EVENT_COLUMNS = ("t", "type", "ball", "hand", "detail")

FLIGHT = "flight"
HELD = "held"

# Contacts with the throwing hand this soon after takeoff are part of the release
_RELEASE_GRACE = 0.05
# A held ball may leave the cone this long before its scheduled takeoff
_TAKEOFF_SLACK = 0.02

_UP = np.array([0.0, 0.0, 1.0])


@dataclass
class Contact:
    """One penalty contact between a ball and a hand surface."""

    normal: np.ndarray
    depth: float
    point: np.ndarray
    surface_velocity: np.ndarray


@dataclass
class HandBody:
    """Kinematic funnel cone. ``position`` is the seat, the centre of a seated ball."""

    hand: int
    mouth_radius: float
    slope_angle: float
    ball_radius: float
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    normal: np.ndarray = field(default_factory=lambda: _UP.copy())
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def depth(self) -> float:
        """Apex to mouth along the axis."""
        return self.mouth_radius / math.tan(self.slope_angle)

    @property
    def wall_length(self) -> float:
        return self.mouth_radius / math.sin(self.slope_angle)

    @property
    def apex(self) -> np.ndarray:
        return self.position - self.ball_radius / math.sin(self.slope_angle) * self.normal

    def set_pose(self, position: np.ndarray, velocity: np.ndarray, normal: np.ndarray, normal_rate: np.ndarray) -> None:
        self.position = position
        self.velocity = velocity
        self.normal = normal
        self.angular_velocity = np.cross(normal, normal_rate)

    def local(self, point: np.ndarray) -> Tuple[float, float, np.ndarray]:
        """Axial height above the apex, distance from the axis and radial unit vector."""
        d = point - self.apex
        h = float(d @ self.normal)
        radial = d - h * self.normal
        rho = float(np.linalg.norm(radial))
        if rho > 1e-12:
            return h, rho, radial / rho
        # On the axis any perpendicular works
        helper = np.array([1.0, 0.0, 0.0]) if abs(self.normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e = helper - (helper @ self.normal) * self.normal
        return h, 0.0, e / np.linalg.norm(e)

    def axis_offset(self, point: np.ndarray) -> float:
        """Distance of ``point`` from the cone axis."""
        return self.local(point)[1]

    def contains(self, point: np.ndarray) -> bool:
        """True while a ball centred at ``point`` is still inside the funnel."""
        h, rho, _ = self.local(point)
        return h <= self.depth + self.ball_radius and rho <= self.mouth_radius + self.ball_radius

    def surface_velocity(self, point: np.ndarray) -> np.ndarray:
        return self.velocity + np.cross(self.angular_velocity, point - self.position)

    def contacts(self, center: np.ndarray, radius: float) -> List[Contact]:
        """Penalty contacts of a sphere against both meridian walls and the rim."""
        if np.linalg.norm(center - self.position) > self.wall_length + self.depth + radius:
            return []
        h, rho, e_rho = self.local(center)
        sin_a, cos_a = math.sin(self.slope_angle), math.cos(self.slope_angle)
        found = []
        for side in (1.0, -1.0):
            s = side * rho * cos_a - h * sin_a
            w = side * rho * sin_a + h * cos_a
            if w > self.wall_length:
                if side > 0:
                    rim = self.apex + self.depth * self.normal + self.mouth_radius * e_rho
                    offset = center - rim
                    distance = float(np.linalg.norm(offset))
                    if 1e-12 < distance < radius:
                        normal = offset / distance
                        found.append(Contact(normal, radius - distance, rim, self.surface_velocity(rim)))
                continue
            if w < 0 or abs(s) >= radius:
                continue
            outward = cos_a * side * e_rho - sin_a * self.normal
            normal = math.copysign(1.0, s) * outward if s != 0 else -outward
            point = center - normal * abs(s)
            found.append(Contact(normal, radius - abs(s), point, self.surface_velocity(point)))
        return found


@dataclass
class BallBody:
    """A ball and its place in the schedule."""

    ball_id: int
    position: np.ndarray
    velocity: np.ndarray
    radius: float = 0.0375
    mass: float = 0.1
    flights: List[BallFlight] = field(default_factory=list)
    flight_index: int = 0
    phase: str = FLIGHT
    holder: Optional[int] = None
    touched: bool = False

    @property
    def current_flight(self) -> Optional[BallFlight]:
        if 0 <= self.flight_index < len(self.flights):
            return self.flights[self.flight_index]
        return None

    def energy(self, g: np.ndarray) -> float:
        return 0.5 * self.mass * float(self.velocity @ self.velocity) - self.mass * float(g @ self.position)


@dataclass
class SimEvent:
    time: float
    kind: str
    ball: Optional[int] = None
    hand: Optional[int] = None
    detail: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            "t": self.time,
            "type": self.kind,
            "ball": self.ball,
            "hand": HAND_NAMES.get(self.hand, "") if self.hand is not None else "",
            "detail": self.detail,
        }


@dataclass
class SimWorld:
    """Balls, hands, contact parameters and the event log."""

    time: float
    balls: List[BallBody]
    hands: List[HandBody]
    contact: ContactConfig
    gravity: np.ndarray
    events: List[SimEvent] = field(default_factory=list)

    @classmethod
    def empty(cls, contact: ContactConfig, gravity: Sequence[float] = (0.0, 0.0, -9.81), time: float = 0.0) -> "SimWorld":
        hands = [HandBody(hand, contact.mouth_radius, contact.slope_angle, contact.ball_radius) for hand in (0, 1)]
        return cls(time, [], hands, contact, np.asarray(gravity, dtype=float))

    def add_ball(self, position: Sequence[float], velocity: Sequence[float] = (0.0, 0.0, 0.0)) -> BallBody:
        ball = BallBody(
            len(self.balls),
            np.asarray(position, dtype=float),
            np.asarray(velocity, dtype=float),
            self.contact.ball_radius,
            self.contact.ball_mass,
        )
        self.balls.append(ball)
        return ball

    def log(self, kind: str, ball: Optional[int] = None, hand: Optional[int] = None, detail: str = "") -> SimEvent:
        event = SimEvent(self.time, kind, ball, hand, detail)
        self.events.append(event)
        return event


def _apply_contact(velocity: np.ndarray, contact: Contact, params: ContactConfig, mass: float, h: float) -> np.ndarray:
    """Spring push, implicit normal damping, then friction clamped at the Coulomb cone."""
    relative = velocity - contact.surface_velocity
    u0 = float(relative @ contact.normal)
    u1 = u0 + h * params.stiffness * contact.depth / mass
    u2 = u1 / (1 + h * params.damping / mass)
    push = max(0.0, u2 - u0)
    velocity = velocity + push * contact.normal
    if params.friction > 0 and push > 0:
        relative = velocity - contact.surface_velocity
        tangential = relative - float(relative @ contact.normal) * contact.normal
        speed = float(np.linalg.norm(tangential))
        if speed > 0:
            reduced = speed / (1 + h * params.friction_damping / mass)
            change = min(speed - reduced, params.friction * push)
            velocity = velocity - change * tangential / speed
    return velocity


def step(world: SimWorld, h: Optional[float] = None) -> SimWorld:
    """
    Advance every ball by one step against the current hand poses.

    Velocities take gravity and contact impulses first; positions then move
    with ``x += h*v - h^2*g/2``, which is exact for free flight.

    Args:
        world: World to advance in place
        h: Step size, defaults to the contact time step

    Returns:
        SimWorld: The same world
    """
    h = world.contact.time_step if h is None else h
    g = world.gravity
    for ball in world.balls:
        velocity = ball.velocity + h * g
        touched = False
        for hand in world.hands:
            for contact in hand.contacts(ball.position, ball.radius):
                velocity = _apply_contact(velocity, contact, world.contact, ball.mass, h)
                touched = True
        ball.touched = touched
        ball.position = ball.position + h * velocity - 0.5 * h * h * g
        ball.velocity = velocity
    world.time += h
    return world


@dataclass
class HandTrack:
    """Hand poses sampled on the simulation step grid, one planned cycle at a time."""

    plan: HandPlan
    t_init: float
    h: float
    _cache: Dict[int, Tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=dict)
    _starts: List[float] = field(default_factory=list)

    def __post_init__(self):
        self._starts = [c.t0 for c in self.plan.cycles]

    def _samples(self, index: int) -> Tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if index not in self._cache:
            cycle = self.plan.cycles[index]
            first = math.ceil((cycle.t0 - self.t_init) / self.h - 1e-9)
            last = math.floor((cycle.t_end - self.t_init) / self.h + 1e-9)
            times = self.t_init + self.h * np.arange(first, last + 1)
            p, v, _ = cycle.trajectory.sample(np.clip(times, cycle.t0, cycle.t_end))
            n, n_rate = cycle.spec.normals.sample_with_rates(times)
            # keep only the two most recent cycles
            if len(self._cache) > 1:
                self._cache.pop(min(self._cache))
            self._cache[index] = (first, p, v, n, n_rate)
        return self._cache[index]

    def pose(self, step_index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Seat position, velocity, axis and axis rate at a step.

        Raises:
            TrajectoryGap: If no planned cycle covers the step
        """
        t = self.t_init + step_index * self.h
        index = bisect.bisect_right(self._starts, t + 1e-12) - 1
        if index < 0 or t > self.plan.cycles[index].t_end + 1e-9:
            raise TrajectoryGap(self.plan.hand, t)
        first, p, v, n, n_rate = self._samples(index)
        k = step_index - first
        if not 0 <= k < len(p):
            raise TrajectoryGap(self.plan.hand, t)
        return p[k], v[k], n[k], n_rate[k]


@dataclass
class EpisodeStats:
    """Outcome of one simulated episode."""

    consecutive_catches: int = 0
    drops: List[Tuple[float, int, str]] = field(default_factory=list)
    touchdown_errors: List[Tuple[int, float]] = field(default_factory=list)
    peak_hand_speed: float = 0.0
    peak_hand_acceleration: float = 0.0
    premature_contacts: int = 0
    proximity_events: int = 0
    simulated_time: float = 0.0
    completed: bool = False
    events: List[SimEvent] = field(default_factory=list)
    traces: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def dropped(self) -> bool:
        return bool(self.drops)

    def summary(self) -> Dict[str, Any]:
        return {
            "consecutive_catches": self.consecutive_catches,
            "drops": [{"t": t, "ball": ball, "cause": cause} for t, ball, cause in self.drops],
            "touchdown_errors": len(self.touchdown_errors),
            "mean_touchdown_error": float(np.mean([e for _, e in self.touchdown_errors])) if self.touchdown_errors else 0.0,
            "peak_hand_speed": self.peak_hand_speed,
            "peak_hand_acceleration": self.peak_hand_acceleration,
            "premature_contacts": self.premature_contacts,
            "proximity_events": self.proximity_events,
            "simulated_time": self.simulated_time,
            "completed": self.completed,
        }


def initial_time(schedule: Schedule) -> float:
    """Simulation start: the takeoff of beat -1."""
    return schedule.time_of(-1)


def initialize_world(
    schedule: Schedule,
    contact: ContactConfig,
    gravity: np.ndarray,
    geometry: HandGeometryConfig,
    plan: Optional[SchedulePlan] = None,
    t_init: Optional[float] = None,
) -> SimWorld:
    """
    Place every ball of a schedule at the simulation start.

    A ball on a flight at ``t_init`` (touchdown instant included) sits on its
    arc. A ball between flights is seated in the hand that holds it; without
    a plan the seat is that hand's takeoff point at rest.
    """
    t_init = initial_time(schedule) if t_init is None else t_init
    world = SimWorld.empty(contact, gravity, t_init)
    for ball_id in range(schedule.ball_count):
        flights = sorted(schedule.flights_of(ball_id), key=lambda f: f.takeoff.time)
        ball = BallBody(ball_id, np.zeros(3), np.zeros(3), contact.ball_radius, contact.ball_mass, flights)
        placed = False
        for index, flight in enumerate(flights):
            if flight.takeoff.time - 1e-12 <= t_init <= flight.touchdown.time + 1e-12:
                ball.flight_index = index
                ball.position = flight.position(t_init)
                ball.velocity = flight.velocity(t_init)
                ball.phase = FLIGHT
                placed = True
                break
            if flight.takeoff.time > t_init:
                holder = flight.takeoff.hand
                ball.flight_index = index
                ball.phase = HELD
                ball.holder = holder
                placed = True
                break
        if not placed:
            # Last flight already landed; the ball rests in its catching hand
            last = flights[-1] if flights else None
            ball.flight_index = len(flights)
            ball.phase = HELD
            ball.holder = last.touchdown.hand if last is not None else 0
        if ball.phase == HELD:
            if plan is not None:
                p, v, _ = plan.hands[ball.holder].state(t_init)
                ball.position, ball.velocity = p.copy(), v.copy()
            else:
                ball.position = geometry.takeoff(ball.holder)
                ball.velocity = np.zeros(3)
        world.balls.append(ball)
    return world


def initialize_from_ground_state(
    ball_count: int,
    timing: TimingConfig,
    geometry: HandGeometryConfig,
    contact: Optional[ContactConfig] = None,
    throws: Sequence[int] = (),
) -> Tuple[SimWorld, Schedule]:
    """
    World and schedule for a run that starts in the ground state.

    The schedule begins with a uniform-cascade prehistory from beat ``-B``
    so that at ``t = -tau/2`` one ball is due in each hand and the rest are
    on their cascade arcs.

    Args:
        ball_count: Number of balls
        timing: Beat timing
        geometry: Hand geometry
        contact: Simulator physics, defaults to ContactConfig()
        throws: Throws from beat 0 on

    Returns:
        Tuple of (world, schedule)
    """
    contact = contact or ContactConfig()
    prehistory = ground_state_prehistory(ball_count)
    width = max([ball_count, *throws, *prehistory]) if throws or prehistory else ball_count
    state = SiteswapState.ground(ball_count, max(width, 1))
    replay(state, list(prehistory) + list(throws))
    schedule = schedule_sequence(
        list(prehistory) + list(throws),
        timing,
        geometry,
        start_time=-len(prehistory) * timing.beat_time,
        initial_state=state,
        first_beat=-len(prehistory),
    )
    return initialize_world(schedule, contact, geometry.g, geometry), schedule


class _Episode:
    """Event bookkeeping of one run."""

    def __init__(self, world: SimWorld, schedule: Schedule, config: JuggleConfig, target: Optional[int], t_init: float):
        self.world = world
        self.schedule = schedule
        self.config = config
        self.target = target
        self.t_init = t_init
        self.half_window = 0.5 * config.timing.dwell_time
        self.stats = EpisodeStats()
        self.near_pairs: set = set()
        self.counted_touchdowns: set = set()

    def drop(self, ball: BallBody, cause: str, hand: Optional[int] = None) -> None:
        self.world.log(DROP, ball.ball_id, hand, cause)
        self.stats.drops.append((self.world.time, ball.ball_id, cause))

    def before_step(self) -> None:
        """Scheduled takeoffs move held balls into flight."""
        t = self.world.time
        for ball in self.world.balls:
            flight = ball.current_flight
            if ball.phase == HELD and flight is not None and t >= flight.takeoff.time - 1e-9:
                ball.phase = FLIGHT
                ball.holder = None
                self.world.log(THROW, ball.ball_id, flight.takeoff.hand, str(flight.throw_height))

    def record_contacts(self, ball: BallBody, contact_position: np.ndarray) -> None:
        """Touchdown error at the first contact with the catching hand, premature contacts otherwise.

        ``contact_position`` is where the ball was when the step's contact forces acted on it.
        """
        if ball.phase != FLIGHT or not ball.touched:
            return
        flight = ball.current_flight
        t = self.world.time - self.config.contact.time_step
        for hand in self.world.hands:
            if not hand.contacts(contact_position, ball.radius):
                continue
            if flight is not None and hand.hand == flight.touchdown.hand and abs(t - flight.touchdown.time) <= self.half_window:
                key = (ball.ball_id, ball.flight_index)
                if key not in self.counted_touchdowns:
                    self.counted_touchdowns.add(key)
                    target = flight.touchdown.position
                    self.stats.touchdown_errors.append(
                        (flight.throw_height, float(np.linalg.norm(contact_position[:2] - target[:2])))
                    )
                continue
            if flight is not None and hand.hand == flight.takeoff.hand and t - flight.takeoff.time <= _RELEASE_GRACE:
                continue
            self.stats.premature_contacts += 1
            self.world.log(PREMATURE_CONTACT, ball.ball_id, hand.hand)

    def after_step(self) -> bool:
        """Detect catches and drops; True once the episode should stop."""
        t = self.world.time
        params = self.config.contact
        for ball in self.world.balls:
            if not np.all(np.isfinite(ball.position)) or not np.all(np.isfinite(ball.velocity)):
                console.print(f"[yellow]Warning:[/yellow] ball {ball.ball_id} state is not finite at t={t:.4f} s")
                self.drop(ball, "nan")
                return True
            flight = ball.current_flight
            if ball.phase == FLIGHT and flight is not None:
                catcher = self.world.hands[flight.touchdown.hand]
                t_td = flight.touchdown.time
                if abs(t - t_td) <= self.half_window:
                    relative = float(np.linalg.norm(ball.velocity - catcher.velocity))
                    if relative < params.catch_speed and catcher.axis_offset(ball.position) < params.catch_axis_fraction * params.mouth_radius:
                        ball.phase = HELD
                        ball.holder = catcher.hand
                        ball.flight_index += 1
                        self.world.log(CATCH, ball.ball_id, catcher.hand, str(flight.throw_height))
                        if t_td > self.t_init + 1e-9:
                            self.stats.consecutive_catches += 1
                            if self.target is not None and self.stats.consecutive_catches >= self.target:
                                return True
                        continue
                if t > t_td + self.half_window:
                    self.drop(ball, "missed", flight.touchdown.hand)
                    return True
                if ball.position[2] < float(flight.touchdown.position[2]) - params.drop_margin:
                    self.drop(ball, "fell", flight.touchdown.hand)
                    return True
            elif ball.phase == HELD:
                hand = self.world.hands[ball.holder]
                takeoff = flight.takeoff.time if flight is not None else float("inf")
                if t < takeoff - _TAKEOFF_SLACK and not hand.contains(ball.position):
                    self.drop(ball, "rollout", ball.holder)
                    return True
        self._proximity()
        return False

    def _proximity(self) -> None:
        balls = self.world.balls
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                close = np.linalg.norm(balls[i].position - balls[j].position) < balls[i].radius + balls[j].radius
                pair = (i, j)
                if close and pair not in self.near_pairs:
                    self.near_pairs.add(pair)
                    self.stats.proximity_events += 1
                    self.world.log(PROXIMITY, i, None, f"{i}-{j}")
                elif not close:
                    self.near_pairs.discard(pair)


def _frame(world: SimWorld, events: List[SimEvent]) -> Dict[str, Any]:
    return {
        "t": world.time,
        "balls": [{"id": b.ball_id, "p": b.position.tolist(), "v": b.velocity.tolist()} for b in world.balls],
        "hands": [{"p": h.position.tolist(), "n_hat": h.normal.tolist()} for h in world.hands],
        "events": [e.to_record() for e in events],
    }


def run_episode(
    plan: SchedulePlan,
    config: JuggleConfig,
    target_catches: Optional[int] = None,
    world: Optional[SimWorld] = None,
    collect_trace: bool = False,
) -> EpisodeStats:
    """
    Simulate a planned schedule until the target catch count, the first drop
    or the end of the plan.

    Args:
        plan: Planned hand trajectories with their schedule
        config: Resolved configuration (contact, timing, geometry)
        target_catches: Stop after this many catches
        world: Initial world, defaults to ``initialize_world`` at ``t = -tau/2``
        collect_trace: Keep decimated frames for trace export

    Returns:
        EpisodeStats: Catches, drops, touchdown errors and diagnostics

    Raises:
        TrajectoryGap: If the plan does not cover the start of the episode
    """
    schedule = plan.schedule
    t_init = initial_time(schedule)
    if world is None:
        world = initialize_world(schedule, config.contact, config.geometry.g, config.geometry, plan, t_init)
    h = config.contact.time_step
    tracks = [HandTrack(plan.hands[hand], t_init, h) for hand in (0, 1)]
    horizon = plan.t_end
    episode = _Episode(world, schedule, config, target_catches, t_init)
    envelope = plan.envelope()
    episode.stats.peak_hand_speed = envelope["peak_speed"]
    episode.stats.peak_hand_acceleration = envelope["peak_acceleration"]

    logged = 0
    n_steps = int(math.floor((horizon - t_init) / h + 1e-9))
    done = False
    for index in range(n_steps):
        world.time = t_init + index * h
        for hand, track in zip(world.hands, tracks):
            hand.set_pose(*track.pose(index))
        episode.before_step()
        pre = [b.position.copy() for b in world.balls]
        step(world, h)
        for hand, track in zip(world.hands, tracks):
            p, v, n, n_rate = track.pose(index + 1)
            hand.set_pose(p, v, n, n_rate)
        for ball, p0 in zip(world.balls, pre):
            episode.record_contacts(ball, p0)
        done = episode.after_step()
        if collect_trace and (index % config.contact.trace_decimation == 0 or done):
            episode.stats.traces.append(_frame(world, world.events[logged:]))
            logged = len(world.events)
        if done:
            break

    stats = episode.stats
    stats.simulated_time = world.time - t_init
    stats.events = list(world.events)
    stats.completed = not stats.drops and (
        target_catches is None or stats.consecutive_catches >= target_catches
    )
    return stats
