"""
Plan hand trajectories for a whole contact-switch schedule.

Hand ``h`` closes a cycle with every takeoff beat ``k`` it owns; that cycle
runs from the takeoff at beat ``k - 2`` to the takeoff at beat ``k``. A cycle
depends only on the previous throw, the incoming ball and the target throw
of its hand, so solved cycles are memoised in a cycle cache.
"""

import bisect
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from rich.console import Console

from jugglespec.ballistics import BallFlight, Schedule, flight_time, predict_touchdown, takeoff_velocity
from jugglespec.cache import CycleCache
from jugglespec.config import HAND_NAMES, JuggleConfig
from jugglespec.cycle import BallPath, CycleSpec, IncomingBall, ThrowTarget, assemble_cycle, build_cycle_spec
from jugglespec.errors import InfeasibleDetected, InfeasibleSpec, TrajectoryGap
from jugglespec.solver import SolveReport, solve
from jugglespec.trajectory import JerkTrajectory, rollout

console = Console(stderr=True)

SPEED_ENVELOPE = 10.0
ACCELERATION_ENVELOPE = 400.0
REFINED_STEPS = 96

StartState = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(eq=False)
class PlannedCycle:
    """One solved catch-and-throw cycle of one hand."""

    hand: int
    beat: int
    previous: int
    incoming: int
    target: int
    spec: CycleSpec
    trajectory: JerkTrajectory
    report: SolveReport
    cache_hit: bool = False

    @property
    def t0(self) -> float:
        return self.trajectory.t0

    @property
    def t_end(self) -> float:
        return self.trajectory.t_end

    def to_record(self) -> Dict[str, Any]:
        return {
            "hand": HAND_NAMES[self.hand],
            "beat": self.beat,
            "previous": self.previous,
            "incoming": self.incoming,
            "target": self.target,
            "t0": self.t0,
            "cache_hit": self.cache_hit,
            "report": self.report.to_dict(),
        }


@dataclass(eq=False)
class HandPlan:
    """Consecutive cycles of one hand with time lookup."""

    hand: int
    cycles: List[PlannedCycle]
    _starts: List[float] = field(init=False, repr=False)

    def __post_init__(self):
        self._starts = [c.t0 for c in self.cycles]

    @property
    def t_start(self) -> float:
        return self.cycles[0].t0 if self.cycles else float("inf")

    @property
    def t_end(self) -> float:
        return self.cycles[-1].t_end if self.cycles else float("-inf")

    def cycle_at(self, t: float) -> PlannedCycle:
        """
        Cycle whose span contains ``t``; at a shared boundary the later one.

        Raises:
            TrajectoryGap: If no cycle covers ``t``
        """
        index = bisect.bisect_right(self._starts, t) - 1
        if index < 0 or not self.cycles[index].trajectory.contains(t):
            raise TrajectoryGap(self.hand, t)
        return self.cycles[index]

    def state(self, t: float) -> StartState:
        return rollout(self.cycle_at(t).trajectory, t)

    def normal(self, t: float) -> np.ndarray:
        return self.cycle_at(t).spec.normals.at(t)

    def normal_rate(self, t: float) -> np.ndarray:
        return self.cycle_at(t).spec.normals.rate(t)


@dataclass(eq=False)
class SchedulePlan:
    """Hand plans for a schedule plus solve statistics."""

    schedule: Schedule
    hands: Dict[int, HandPlan]
    cache_hits: int = 0
    cache_misses: int = 0

    @property
    def t_start(self) -> float:
        return max(plan.t_start for plan in self.hands.values())

    @property
    def t_end(self) -> float:
        return min(plan.t_end for plan in self.hands.values())

    def cycles(self) -> List[PlannedCycle]:
        every = [c for plan in self.hands.values() for c in plan.cycles]
        return sorted(every, key=lambda c: (c.t0, c.hand))

    def solve_times(self) -> List[float]:
        """Wall time of every cycle that was actually solved (cache misses)."""
        return [c.report.wall_time for c in self.cycles() if not c.cache_hit]

    def all_converged(self) -> bool:
        return all(c.report.converged for c in self.cycles())

    def envelope(self) -> Dict[str, Any]:
        """Peak hand speed and acceleration against the motion envelope."""
        cycles = self.cycles()
        speed = max((c.trajectory.peak_speed() for c in cycles), default=0.0)
        acceleration = max((c.trajectory.peak_acceleration() for c in cycles), default=0.0)
        return {
            "peak_speed": speed,
            "peak_acceleration": acceleration,
            "speed_limit": SPEED_ENVELOPE,
            "acceleration_limit": ACCELERATION_ENVELOPE,
            "within_envelope": speed < SPEED_ENVELOPE and acceleration < ACCELERATION_ENVELOPE,
        }

    def trajectory_records(self) -> List[Dict[str, Any]]:
        records = []
        for cycle in self.cycles():
            for record in cycle.trajectory.to_records(cycle.spec.normals):
                records.append({"hand": HAND_NAMES[cycle.hand], "beat": cycle.beat, **record})
        return records


def _path(flight: BallFlight) -> BallPath:
    return BallPath(
        t_takeoff=flight.takeoff.time,
        p_takeoff=flight.takeoff.position,
        v_takeoff=flight.takeoff.velocity,
        gravity=flight.gravity,
        height=flight.throw_height,
    )


def _incoming(flight: BallFlight, catch_height: float) -> IncomingBall:
    t_fall, p_td, v_td = predict_touchdown(flight.takeoff.position, flight.takeoff.velocity, catch_height, flight.gravity)
    return IncomingBall(flight.takeoff.time + t_fall, p_td, v_td, _path(flight))


class Planner:
    """
    Solves the cycles of a schedule, hand by hand.

    Args:
        config: Resolved configuration
        cache: Optional shared cycle cache
    """

    def __init__(self, config: JuggleConfig, cache: Optional[CycleCache] = None):
        self.config = config
        self.cache = cache
        self.fingerprint = config.fingerprint()
        self._warm: Dict[int, np.ndarray] = {}

    def _rest(self, hand: int) -> StartState:
        return self.config.geometry.takeoff(hand), np.zeros(3), np.zeros(3)

    def cycle_spec(
        self,
        schedule: Schedule,
        hand: int,
        beat: int,
        start: Optional[StartState] = None,
        first: bool = False,
        n_steps: Optional[int] = None,
    ) -> CycleSpec:
        """
        Specification of the cycle of ``hand`` that ends with the takeoff at ``beat``.

        Args:
            schedule: Contact-switch schedule
            hand: Hand owning ``beat``
            beat: Takeoff beat closing the cycle
            start: Hand state at the cycle start when it is not implied by
                the previous throw (free end of a non-homing empty cycle)
            first: True for the first planned cycle of this hand
            n_steps: Override of the jerk step count

        Returns:
            CycleSpec: The cycle specification

        Raises:
            InfeasibleSpec: If a ball is due at ``beat`` without a flight
                after the first cycle
        """
        geometry = self.config.geometry
        g = geometry.g
        t0 = schedule.time_of(beat - 2)
        launches = {f.takeoff.beat: f for f in schedule.flights}

        previous_flight = launches.get(beat - 2)
        if previous_flight is not None:
            start = (geometry.takeoff(hand), previous_flight.takeoff.velocity.copy(), g.copy())
        elif start is None or self.config.optimizer.empty_cycle_homing:
            start = self._rest(hand)

        outgoing = None
        if schedule.throw_at(beat) > 0:
            flight = launches[beat]
            outgoing = ThrowTarget(flight.takeoff.position, flight.takeoff.velocity, flight.throw_height)

        incoming = None
        held = False
        landing = schedule.flight_landing_at(beat)
        if landing is not None:
            incoming = _incoming(landing, float(geometry.touchdown(hand)[2]))
        elif outgoing is not None:
            if not first:
                raise InfeasibleSpec(f"ball thrown at beat {beat} was never caught by the {HAND_NAMES[hand]} hand")
            held = True

        home = geometry.takeoff(hand) if outgoing is None and self.config.optimizer.empty_cycle_homing else None
        return build_cycle_spec(
            self.config.optimizer,
            t0,
            self.config.timing.cycle_time,
            start,
            g,
            outgoing=outgoing,
            incoming=incoming,
            previous=_path(previous_flight) if previous_flight is not None else None,
            held_at_start=held,
            home=home,
            n_steps=n_steps,
        )

    def solve_spec(self, spec: CycleSpec, hand: int) -> Tuple[JerkTrajectory, SolveReport, bool]:
        """
        Solve one cycle, through the cache when one is attached.

        Returns:
            Tuple of (trajectory, report, cache hit)
        """
        key = None
        if self.cache is not None:
            key = self.cache.generate_key(f"{hand}:{spec.signature()}", self.fingerprint)
            cached = self.cache.get(key)
            if cached is not None:
                traj = JerkTrajectory(spec.t0, spec.dt, spec.p0, spec.v0, spec.a0, np.array(cached["jerks"]))
                return traj, SolveReport(**cached["report"]), True

        problem = assemble_cycle(spec)
        warm = self._warm.get(hand) if self.config.solver.warm_start else None
        try:
            traj, report = solve(problem, self.config.solver, warm)
        except InfeasibleDetected as e:
            console.print(f"[yellow]Warning:[/yellow] {HAND_NAMES[hand]} hand cycle at t={spec.t0:.3f} s: {e}")
            traj, report = e.trajectory, e.report
        if traj.n_steps == self.config.optimizer.n_steps:
            self._warm[hand] = traj.jerks.reshape(-1).copy()
        if key is not None:
            self.cache.set(key, {"jerks": traj.jerks.copy(), "report": report.to_dict()})
        return traj, report, False

    def plan_hand(self, schedule: Schedule, hand: int, first_beat: int = 0, last_beat: Optional[int] = None) -> HandPlan:
        """Plan every cycle of ``hand`` closing at beats ``first_beat..last_beat``."""
        last_beat = schedule.last_beat if last_beat is None else last_beat
        beat = first_beat if first_beat % 2 == hand else first_beat + 1
        cycles: List[PlannedCycle] = []
        start: Optional[StartState] = None
        while beat <= last_beat:
            spec = self.cycle_spec(schedule, hand, beat, start, first=not cycles)
            traj, report, hit = self.solve_spec(spec, hand)
            landing = schedule.flight_landing_at(beat)
            cycles.append(PlannedCycle(
                hand=hand,
                beat=beat,
                previous=schedule.throw_at(beat - 2),
                incoming=landing.throw_height if landing is not None else 0,
                target=schedule.throw_at(beat),
                spec=spec,
                trajectory=traj,
                report=report,
                cache_hit=hit,
            ))
            start = traj.end_state()
            beat += 2
        return HandPlan(hand, cycles)

    def plan_schedule(self, schedule: Schedule, first_beat: int = 0, last_beat: Optional[int] = None) -> SchedulePlan:
        """
        Plan both hands of a schedule.

        Args:
            schedule: Contact-switch schedule, prehistory included
            first_beat: First takeoff beat to close a cycle; the cycles
                closing at ``first_beat`` and ``first_beat + 1`` start at
                ``first_beat - 2`` and ``first_beat - 1``
            last_beat: Last takeoff beat to plan, defaults to the schedule end

        Returns:
            SchedulePlan: Plans of both hands
        """
        hands = {hand: self.plan_hand(schedule, hand, first_beat, last_beat) for hand in (0, 1)}
        cycles = [c for plan in hands.values() for c in plan.cycles]
        hits = sum(1 for c in cycles if c.cache_hit)
        for cycle in cycles:
            if not cycle.report.converged:
                console.print(
                    f"[yellow]Warning:[/yellow] {HAND_NAMES[cycle.hand]} hand cycle ending at beat "
                    f"{cycle.beat} did not converge ({cycle.report.status})"
                )
        return SchedulePlan(schedule, hands, cache_hits=hits, cache_misses=len(cycles) - hits)

    def refinement_delta(self, schedule: Schedule, cycle: PlannedCycle, n_steps: int = REFINED_STEPS) -> float:
        """Change of the takeoff velocity when ``cycle`` is re-solved with ``n_steps`` jerk steps."""
        start = (cycle.spec.p0, cycle.spec.v0, cycle.spec.a0)
        spec = self.cycle_spec(schedule, cycle.hand, cycle.beat, start, first=cycle.spec.held_at_start, n_steps=n_steps)
        refined, _ = solve(assemble_cycle(spec), self.config.solver)
        _, v_coarse, _ = cycle.trajectory.end_state()
        _, v_fine, _ = refined.end_state()
        return float(np.linalg.norm(v_fine - v_coarse))


def cycle_spec_for_heights(
    config: JuggleConfig,
    hand: int,
    previous: int,
    incoming: int,
    target: int,
    t0: float = 0.0,
    n_steps: Optional[int] = None,
) -> CycleSpec:
    """
    Stand-alone cycle for a (previous, incoming, target) height triple.

    The cycle ends with the takeoff of beat ``hand + 2``; the previous throw
    left at beat ``hand`` and the incoming ball was thrown ``incoming`` beats
    before the end. Zero heights mean no throw or no incoming ball.

    Raises:
        InfeasibleSpec: If a target throw has no incoming ball or vice versa
    """
    if (incoming == 0) != (target == 0):
        raise InfeasibleSpec("a hand throws exactly when it catches")
    timing, geometry = config.timing, config.geometry
    g = geometry.g
    beat = hand + 2
    tau_beat = timing.beat_time

    def flight(height: int, from_beat: int) -> Tuple[BallPath, float]:
        src, dst = from_beat % 2, (from_beat + height) % 2
        duration = flight_time(height, timing)
        t_takeoff = t0 + (from_beat - hand) * tau_beat
        p_to = geometry.takeoff(src)
        v_to = takeoff_velocity(p_to, geometry.touchdown(dst), duration, g)
        return BallPath(t_takeoff, p_to, v_to, g, height), duration

    previous_path = None
    if previous > 0:
        previous_path, _ = flight(previous, hand)
        start = (geometry.takeoff(hand), previous_path.v_takeoff.copy(), g.copy())
    else:
        start = (geometry.takeoff(hand), np.zeros(3), np.zeros(3))

    incoming_ball = None
    outgoing = None
    if incoming > 0:
        path, duration = flight(incoming, beat - incoming)
        t_td = path.t_takeoff + duration
        incoming_ball = IncomingBall(t_td, path.position(t_td), path.velocity(t_td), path)
        out_path, _ = flight(target, beat)
        outgoing = ThrowTarget(out_path.p_takeoff, out_path.v_takeoff, target)

    home = geometry.takeoff(hand) if outgoing is None and config.optimizer.empty_cycle_homing else None
    return build_cycle_spec(
        config.optimizer,
        t0,
        timing.cycle_time,
        start,
        g,
        outgoing=outgoing,
        incoming=incoming_ball,
        previous=previous_path,
        home=home,
        n_steps=n_steps,
    )
