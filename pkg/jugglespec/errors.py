"""
Exception hierarchy for jugglespec.

Errors that describe bad input also derive from ValueError so callers that
only know about ValueError still catch them.
"""

from typing import Any, Optional


class JuggleSpecError(Exception):
    """Base class for every error raised by jugglespec."""


class ConfigurationError(JuggleSpecError, ValueError):
    """Invalid or unreadable configuration."""


# Siteswap notation and state graph

class PatternError(JuggleSpecError, ValueError):
    """A digit string is not a valid vanilla siteswap."""


class NonIntegerAverage(PatternError):
    def __init__(self, total: int, period: int):
        self.total = total
        self.period = period
        super().__init__(f"average throw height {total}/{period} is not an integer")


class CollisionAtBeat(PatternError):
    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"throws at beats {i} and {j} land on the same beat")


class ForbiddenHeight(PatternError):
    def __init__(self, height: int, reason: str = "not in the enabled throw heights"):
        self.height = height
        super().__init__(f"throw height {height} is {reason}")


class TransitionError(JuggleSpecError, ValueError):
    """A throw is not legal from the given state."""


class SlotOccupied(TransitionError):
    def __init__(self, height: int):
        self.height = height
        super().__init__(f"a {height}-throw lands on a beat that is already taken")


class EmptyHandThrow(TransitionError):
    def __init__(self, height: int):
        self.height = height
        super().__init__(f"cannot make a {height}-throw: no ball lands this beat")


class HeldBallIdle(TransitionError):
    def __init__(self):
        super().__init__("cannot make a 0-throw while a ball lands this beat")


class Unreachable(JuggleSpecError):
    """No throw sequence connects the requested states."""


class BallCountMismatch(JuggleSpecError, ValueError):
    def __init__(self, first: int, second: int):
        self.first = first
        self.second = second
        super().__init__(f"patterns use different ball counts ({first} vs {second})")


# Ballistics

class NonPositiveFlightTime(JuggleSpecError, ValueError):
    def __init__(self, height: int, flight_time: float):
        self.height = height
        self.flight_time = flight_time
        super().__init__(
            f"a {height}-throw has flight time {flight_time:.4f} s at this timing"
        )


class NeverCrosses(JuggleSpecError, ValueError):
    """The ball never reaches the catch plane on a descending path."""


# Trajectory optimization

class OutOfDomain(JuggleSpecError, ValueError):
    """A trajectory was evaluated outside its time span."""


class WindowOverlap(JuggleSpecError, ValueError):
    """Constraint windows of one cycle overlap each other."""


class InfeasibleSpec(JuggleSpecError, ValueError):
    """A cycle specification violates its own invariants."""


class InfeasibleDetected(JuggleSpecError):
    """The solver stalled at maximum penalty without reaching feasibility."""

    def __init__(self, message: str, trajectory: Any = None, report: Optional[Any] = None):
        self.trajectory = trajectory
        self.report = report
        super().__init__(message)


# Simulation

class TrajectoryGap(JuggleSpecError):
    """A hand has no planned trajectory at the requested time."""

    def __init__(self, hand: int, time: float):
        self.hand = hand
        self.time = time
        super().__init__(f"hand {hand} has no planned trajectory at t={time:.4f} s")
