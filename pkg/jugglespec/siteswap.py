"""
Vanilla siteswap notation, juggling states and the siteswap state graph.

A state is a bit vector of scheduled landings: bit i set means a ball lands
i+1 beats from now, so bit 0 is the ball that has to be thrown this beat.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from jugglespec.errors import (
    BallCountMismatch,
    CollisionAtBeat,
    EmptyHandThrow,
    ForbiddenHeight,
    HeldBallIdle,
    NonIntegerAverage,
    PatternError,
    SlotOccupied,
    TransitionError,
    Unreachable,
)

MAX_HEIGHT = 9
DEFAULT_HEIGHTS: Tuple[int, ...] = (0, 2, 3, 4, 5, 6, 7, 8, 9)
ALL_HEIGHTS: Tuple[int, ...] = tuple(range(10))

WeightFn = Callable[[int], float]


@dataclass(frozen=True, order=True)
class SiteswapState:
    """Landing schedule of the balls currently in play."""

    bits: int
    width: int

    @classmethod
    def from_list(cls, slots: Sequence[int]) -> "SiteswapState":
        """Build a state from a 0/1 list, slot 0 first (``[1, 1, 1, 0]``)."""
        bits = 0
        for i, slot in enumerate(slots):
            if slot not in (0, 1):
                raise ValueError(f"state slots must be 0 or 1, got {slot}")
            bits |= slot << i
        return cls(bits, len(slots))

    @classmethod
    def ground(cls, ball_count: int, width: int) -> "SiteswapState":
        if not 0 <= ball_count <= width:
            raise ValueError(f"cannot place {ball_count} balls in {width} slots")
        return cls((1 << ball_count) - 1, width)

    @property
    def ball_count(self) -> int:
        return bin(self.bits).count("1")

    def occupied(self, slot: int) -> bool:
        return bool(self.bits >> slot & 1)

    def to_list(self) -> List[int]:
        return [self.bits >> i & 1 for i in range(self.width)]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_list())


@dataclass(frozen=True)
class SiteswapPattern:
    """A validated periodic throw sequence."""

    throws: Tuple[int, ...]

    @property
    def period(self) -> int:
        return len(self.throws)

    @property
    def ball_count(self) -> int:
        return sum(self.throws) // self.period

    @property
    def max_height(self) -> int:
        return max(self.throws)

    def __str__(self) -> str:
        return "".join(str(t) for t in self.throws)


@dataclass(frozen=True)
class PlannedPath:
    """Result of a graph search: where it starts, what to throw, where it ends."""

    start: SiteswapState
    throws: Tuple[int, ...]
    end: SiteswapState


def step_state(state: SiteswapState, throw: int) -> SiteswapState:
    """
    Apply one throw to a state.

    Args:
        state: Current landing schedule
        throw: Throw height in beats (0 means an idle beat)

    Returns:
        SiteswapState: Schedule after the throw

    Raises:
        ForbiddenHeight: If the height does not fit the state width
        HeldBallIdle: If a ball lands this beat and the throw is 0
        EmptyHandThrow: If no ball lands this beat and the throw is positive
        SlotOccupied: If the target beat is already taken
    """
    if throw < 0 or throw > state.width:
        raise ForbiddenHeight(throw, f"outside 0..{state.width}")
    lands_now = state.bits & 1
    shifted = state.bits >> 1
    if throw == 0:
        if lands_now:
            raise HeldBallIdle()
        return SiteswapState(shifted, state.width)
    if not lands_now:
        raise EmptyHandThrow(throw)
    slot = 1 << (throw - 1)
    if shifted & slot:
        raise SlotOccupied(throw)
    return SiteswapState(shifted | slot, state.width)


def replay(state: SiteswapState, throws: Iterable[int]) -> List[SiteswapState]:
    """States visited by a throw sequence, starting state included."""
    visited = [state]
    for throw in throws:
        state = step_state(state, throw)
        visited.append(state)
    return visited


def parse_pattern(text: str, heights: Sequence[int] = DEFAULT_HEIGHTS) -> SiteswapPattern:
    """
    Parse and validate a vanilla siteswap digit string.

    Args:
        text: Digit string such as ``"423"``
        heights: Throw heights that are allowed

    Returns:
        SiteswapPattern: The validated pattern

    Raises:
        PatternError: If the text is empty or contains non-digits
        ForbiddenHeight: If a digit is not an allowed height
        CollisionAtBeat: If two throws land on the same beat
        NonIntegerAverage: If the throw average is not a whole ball count
    """
    if not text or any(c not in "0123456789" for c in text):
        raise PatternError(f"'{text}' is not a non-empty digit string")
    throws = tuple(int(c) for c in text)
    for throw in throws:
        if throw not in heights:
            raise ForbiddenHeight(throw)

    period = len(throws)
    landing: Dict[int, int] = {}
    for beat, throw in enumerate(throws):
        slot = (beat + throw) % period
        if slot in landing:
            raise CollisionAtBeat(landing[slot], beat)
        landing[slot] = beat

    total = sum(throws)
    if total % period:
        raise NonIntegerAverage(total, period)
    return SiteswapPattern(throws)


def pattern_states(pattern: SiteswapPattern, width: int) -> Tuple[SiteswapState, ...]:
    """
    States traversed by a pattern, one per phase.

    Entry ``k`` is the state just before the throw ``pattern.throws[k]``.

    Raises:
        ForbiddenHeight: If the pattern throws higher than ``width``
    """
    if pattern.max_height > width:
        raise ForbiddenHeight(pattern.max_height, f"higher than the graph height {width}")
    period = pattern.period
    states = []
    for phase in range(period):
        bits = 0
        for back in range(1, width + 1):
            throw = pattern.throws[(phase - back) % period]
            lands_in = throw - back
            if throw > 0 and lands_in >= 0:
                bits |= 1 << lands_in
        states.append(SiteswapState(bits, width))
    return tuple(states)


def phase_of(pattern: SiteswapPattern, state: SiteswapState) -> int:
    """First pattern phase whose state equals ``state``.

    Raises:
        ValueError: If the state is not on the pattern loop
    """
    for phase, candidate in enumerate(pattern_states(pattern, state.width)):
        if candidate == state:
            return phase
    raise ValueError(f"state {state} is not on the loop of pattern {pattern}")


@dataclass(frozen=True)
class SiteswapGraph:
    """Immutable directed graph of juggling states for one ball count."""

    max_height: int
    ball_count: int
    heights: Tuple[int, ...]
    states: Tuple[SiteswapState, ...]
    edges: Tuple[Tuple[SiteswapState, int, SiteswapState], ...]
    _adjacency: Dict[int, Tuple[Tuple[int, int], ...]] = field(repr=False, compare=False, default_factory=dict)

    @property
    def ground_state(self) -> SiteswapState:
        return SiteswapState.ground(self.ball_count, self.max_height)

    def successors(self, state: SiteswapState) -> List[Tuple[int, SiteswapState]]:
        """Legal (throw, next state) pairs in increasing throw order."""
        return [(throw, SiteswapState(bits, self.max_height)) for throw, bits in self._adjacency[state.bits]]

    def export_adjacency(self) -> str:
        """One ``state_bits throw -> state_bits`` line per edge."""
        return "\n".join(f"{src} {throw} -> {dst}" for src, throw, dst in self.edges)


def build_graph(max_height: int, ball_count: int, heights: Sequence[int] = DEFAULT_HEIGHTS) -> SiteswapGraph:
    """
    Enumerate every state and legal throw for ``ball_count`` balls.

    Args:
        max_height: Width of the state vector (highest throw)
        ball_count: Number of balls
        heights: Throw heights to use as edges

    Returns:
        SiteswapGraph: The state graph

    Raises:
        ValueError: If the sizes are outside 0 < B <= H <= 9
    """
    if not 0 < ball_count <= max_height <= MAX_HEIGHT:
        raise ValueError(f"need 0 < ball_count <= max_height <= {MAX_HEIGHT}, got B={ball_count}, H={max_height}")
    usable = tuple(sorted(h for h in set(heights) if 0 <= h <= max_height))

    states = sorted(
        SiteswapState(sum(1 << i for i in slots), max_height)
        for slots in itertools.combinations(range(max_height), ball_count)
    )
    edges = []
    adjacency: Dict[int, Tuple[Tuple[int, int], ...]] = {}
    for state in states:
        out = []
        for throw in usable:
            try:
                nxt = step_state(state, throw)
            except TransitionError:
                continue
            out.append((throw, nxt.bits))
            edges.append((state, throw, nxt))
        adjacency[state.bits] = tuple(out)
    return SiteswapGraph(max_height, ball_count, usable, tuple(states), tuple(edges), adjacency)


def _unit_weight(throw: int) -> float:
    return 1.0


def shortest_path(
    graph: SiteswapGraph,
    sources: Iterable[SiteswapState],
    goals: Iterable[SiteswapState],
    weight: Optional[WeightFn] = None,
) -> PlannedPath:
    """
    Dijkstra search from any source to any goal.

    Ties between equally cheap paths go to the lexicographically smallest
    throw sequence.

    Raises:
        Unreachable: If no goal can be reached
    """
    weight = weight or _unit_weight
    goal_bits: FrozenSet[int] = frozenset(s.bits for s in goals)
    heap: List[Tuple[float, Tuple[int, ...], int, int]] = [(0.0, (), s.bits, s.bits) for s in sources]
    heapq.heapify(heap)
    settled = set()
    while heap:
        cost, path, start, bits = heapq.heappop(heap)
        if bits in settled:
            continue
        settled.add(bits)
        if bits in goal_bits:
            width = graph.max_height
            return PlannedPath(SiteswapState(start, width), path, SiteswapState(bits, width))
        for throw, nxt in graph._adjacency[bits]:
            if nxt not in settled:
                step_cost = weight(throw)
                if step_cost <= 0:
                    raise ValueError(f"edge weights must be positive, got {step_cost} for a {throw}-throw")
                heapq.heappush(heap, (cost + step_cost, path + (throw,), start, nxt))
    raise Unreachable("no throw sequence reaches the target states with the enabled heights")


def _check_pattern(graph: SiteswapGraph, pattern: SiteswapPattern) -> None:
    if pattern.ball_count != graph.ball_count:
        raise BallCountMismatch(pattern.ball_count, graph.ball_count)
    for throw in pattern.throws:
        if throw not in graph.heights:
            raise ForbiddenHeight(throw)


def plan_entry_path(graph: SiteswapGraph, target: SiteswapPattern, weight: Optional[WeightFn] = None) -> PlannedPath:
    _check_pattern(graph, target)
    return shortest_path(graph, [graph.ground_state], pattern_states(target, graph.max_height), weight)


def plan_entry(graph: SiteswapGraph, target: SiteswapPattern, weight: Optional[WeightFn] = None) -> List[int]:
    """
    Shortest throw sequence from the ground state onto a pattern loop.

    Returns:
        List[int]: Throws; empty when the ground state is on the loop

    Raises:
        BallCountMismatch: If the pattern needs a different ball count
        Unreachable: If the enabled heights disconnect the graph
    """
    return list(plan_entry_path(graph, target, weight).throws)


def plan_transition_path(
    graph: SiteswapGraph,
    source: SiteswapPattern,
    target: SiteswapPattern,
    weight: Optional[WeightFn] = None,
) -> PlannedPath:
    if source.ball_count != target.ball_count:
        raise BallCountMismatch(source.ball_count, target.ball_count)
    _check_pattern(graph, source)
    _check_pattern(graph, target)
    width = graph.max_height
    return shortest_path(graph, pattern_states(source, width), pattern_states(target, width), weight)


def plan_transition(
    graph: SiteswapGraph,
    source: SiteswapPattern,
    target: SiteswapPattern,
    weight: Optional[WeightFn] = None,
) -> List[int]:
    """
    Shortest throw sequence from any state of one loop to any state of another.

    Returns:
        List[int]: Throws; empty when the two loops share a state

    Raises:
        BallCountMismatch: If the patterns use different ball counts
    """
    return list(plan_transition_path(graph, source, target, weight).throws)


def random_walk(graph: SiteswapGraph, start: SiteswapState, n: int, seed: int) -> List[int]:
    """
    Uniform random walk over legal throws.

    Uses a Philox counter-based generator so a seed gives the same walk on
    every platform.

    Args:
        graph: State graph
        start: Starting state
        n: Number of throws
        seed: Generator seed

    Returns:
        List[int]: The sampled throws
    """
    if n < 0:
        raise ValueError("walk length must be non-negative")
    rng = np.random.Generator(np.random.Philox(seed))
    bits = start.bits
    throws = []
    for _ in range(n):
        options = graph._adjacency[bits]
        throw, bits = options[int(rng.integers(len(options)))]
        throws.append(throw)
    return throws


def disjoint_loops(graph: SiteswapGraph, first: SiteswapPattern, second: SiteswapPattern) -> bool:
    """True when the two pattern loops share no state."""
    width = graph.max_height
    return not set(pattern_states(first, width)) & set(pattern_states(second, width))
