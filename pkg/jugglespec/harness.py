"""
Experiments: pattern and transition stability, random walks with coverage,
ablations and throw accuracy.

Every run starts from the ground state, plans its throw sequence on the
siteswap graph, schedules it, solves the hand cycles and simulates the
result. Independent runs fan out over worker threads; each worker owns its
planner and world, and results come back in submission order.
"""

import itertools
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from jugglespec.ballistics import Schedule, check_heights
from jugglespec.cache import CycleCache, get_cache_manager
from jugglespec.config import ABLATIONS, JuggleConfig
from jugglespec.errors import BallCountMismatch, ConfigurationError
from jugglespec.patterns import PATTERN_TABLE
from jugglespec.planner import Planner, SchedulePlan
from jugglespec.simulator import EpisodeStats, initialize_from_ground_state, run_episode
from jugglespec.siteswap import (
    ALL_HEIGHTS,
    DEFAULT_HEIGHTS,
    SiteswapGraph,
    SiteswapPattern,
    SiteswapState,
    build_graph,
    disjoint_loops,
    parse_pattern,
    phase_of,
    plan_entry_path,
    plan_transition_path,
    random_walk,
    shortest_path,
    step_state,
)
from jugglespec.utils import summarize

PREVIOUS_HEIGHTS: Tuple[int, ...] = (0, 2, 3, 4, 5, 6, 7, 8, 9)
CATCH_HEIGHTS: Tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9)

T = TypeVar("T")
R = TypeVar("R")


def fan_out(
    fn: Callable[[T], R],
    items: Sequence[T],
    workers: int = 1,
    on_done: Optional[Callable[[int], None]] = None,
) -> List[R]:
    """Map ``fn`` over ``items`` on a thread pool, keeping input order."""
    if workers <= 1 or len(items) <= 1:
        results = []
        for i, item in enumerate(items):
            results.append(fn(item))
            if on_done:
                on_done(i)
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, item) for item in items]
        results = []
        for i, future in enumerate(futures):
            results.append(future.result())
            if on_done:
                on_done(i)
        return results


def structurally_possible(previous: int, incoming: int, target: int) -> bool:
    """
    Whether a hand can ever see this (previous throw, incoming ball, target throw) triple.

    Height-1 throws never occur, a target of ``previous - 2`` would land on
    the same beat as the previous throw, and a 2-catch follows exactly a
    2-throw of the same hand.
    """
    if 1 in (previous, incoming, target) or incoming == 0 or target == 0:
        return False
    if previous > 2 and target == previous - 2:
        return False
    return (previous == 2) == (incoming == 2)


@dataclass
class CoverageMatrix:
    """Counts of (previous, incoming, target) height triples seen by the hands."""

    counts: np.ndarray = field(
        default_factory=lambda: np.zeros((len(PREVIOUS_HEIGHTS), len(CATCH_HEIGHTS), len(CATCH_HEIGHTS)), dtype=int)
    )

    @staticmethod
    def _index(previous: int, incoming: int, target: int) -> Tuple[int, int, int]:
        return PREVIOUS_HEIGHTS.index(previous), CATCH_HEIGHTS.index(incoming), CATCH_HEIGHTS.index(target)

    def add(self, previous: int, incoming: int, target: int, count: int = 1) -> None:
        self.counts[self._index(previous, incoming, target)] += count

    def count(self, previous: int, incoming: int, target: int) -> int:
        return int(self.counts[self._index(previous, incoming, target)])

    def merge(self, other: "CoverageMatrix") -> "CoverageMatrix":
        return CoverageMatrix(self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def triples(self) -> Iterable[Tuple[int, int, int]]:
        return itertools.product(PREVIOUS_HEIGHTS, CATCH_HEIGHTS, CATCH_HEIGHTS)

    def missing(self) -> List[Tuple[int, int, int]]:
        """Possible triples that were never seen."""
        return [t for t in self.triples() if structurally_possible(*t) and self.count(*t) == 0]

    def impossible_seen(self) -> List[Tuple[int, int, int]]:
        """Impossible triples with a non-zero count; empty for every legal sequence."""
        return [t for t in self.triples() if not structurally_possible(*t) and self.count(*t) > 0]

    def rows(self) -> List[Tuple[int, int, int, int]]:
        return [(p, i, t, self.count(p, i, t)) for p, i, t in self.triples()]

    def heatmap(self) -> str:
        """One text block per previous height: incoming down, target across, ``x`` where impossible."""
        shades = " .:-=+*#%@"
        peak = max(int(self.counts.max()), 1)
        blocks = []
        for a, previous in enumerate(PREVIOUS_HEIGHTS):
            lines = [f"previous {previous}   target " + "".join(str(t) for t in CATCH_HEIGHTS)]
            for b, incoming in enumerate(CATCH_HEIGHTS):
                cells = []
                for c, target in enumerate(CATCH_HEIGHTS):
                    value = int(self.counts[a, b, c])
                    if not structurally_possible(previous, incoming, target):
                        cells.append("x")
                    elif value == 0:
                        cells.append(" ")
                    else:
                        level = 1 + int((len(shades) - 2) * np.log1p(value) / np.log1p(peak))
                        cells.append(shades[min(level, len(shades) - 1)])
                lines.append(f"  incoming {incoming}       " + "".join(cells))
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks)


def coverage_from_schedule(
    schedule: Schedule,
    first_beat: int = 0,
    last_beat: Optional[int] = None,
    until_time: Optional[float] = None,
) -> CoverageMatrix:
    """
    Coverage of every caught-and-thrown beat of a schedule.

    Args:
        schedule: Contact-switch schedule
        first_beat: First beat to count (prehistory beats are skipped)
        last_beat: Last beat to count, defaults to the end of the schedule
        until_time: Only count beats thrown at or before this time

    Returns:
        CoverageMatrix: Triple counts
    """
    matrix = CoverageMatrix()
    last_beat = schedule.last_beat if last_beat is None else min(last_beat, schedule.last_beat)
    for beat in range(first_beat, last_beat + 1):
        if until_time is not None and schedule.time_of(beat) > until_time:
            break
        target = schedule.throw_at(beat)
        incoming = schedule.incoming_height(beat)
        if target == 0 or incoming is None:
            continue
        matrix.add(schedule.throw_at(beat - 2), incoming, target)
    return matrix


# Throw sequences

def _heights(config: JuggleConfig) -> Tuple[int, ...]:
    return ALL_HEIGHTS if config.experiment.allow_one_throws else DEFAULT_HEIGHTS


def graph_for(ball_count: int, config: JuggleConfig, max_height: Optional[int] = None) -> SiteswapGraph:
    """
    Siteswap graph for a ball count at the configured (or given) height.

    Raises:
        ConfigurationError: If the ball count does not fit the height
    """
    height = config.experiment.max_height if max_height is None else max_height
    if not 0 < ball_count <= height <= 9:
        raise ConfigurationError(f"ball count {ball_count} does not fit graph height {height}")
    return build_graph(height, ball_count, _heights(config))


def _positive(throws: Sequence[int]) -> int:
    return sum(1 for t in throws if t > 0)


def _tail(config: JuggleConfig) -> int:
    """Throws past the last counted catch so every counted ball lands inside the plan."""
    return 2 * config.experiment.max_height + 4


def _run_loop(
    pattern: SiteswapPattern,
    state: SiteswapState,
    throws: List[int],
    min_throws: int,
    stop: Optional[SiteswapState] = None,
) -> SiteswapState:
    """Append pattern throws from ``state`` until ``min_throws`` were made and ``stop`` is reached."""
    phase = phase_of(pattern, state)
    made = 0
    while made < min_throws or (stop is not None and state != stop):
        if made >= min_throws + pattern.period:
            raise ValueError(f"state {stop} is not on the loop of {pattern}")
        throw = pattern.throws[phase]
        throws.append(throw)
        state = step_state(state, throw)
        phase = (phase + 1) % pattern.period
        made += 1
    return state


def pattern_sequence(pattern: SiteswapPattern, graph: SiteswapGraph, catches: int, tail: int = 0) -> List[int]:
    """
    Entry from the ground state followed by whole periods of the pattern.

    Returns:
        List[int]: Throws from beat 0 with at least ``catches + tail`` positive throws
    """
    path = plan_entry_path(graph, pattern)
    throws = list(path.throws)
    state = path.end
    while _positive(throws) < catches + tail:
        state = _run_loop(pattern, state, throws, pattern.period)
    return throws


def transition_sequence(
    first: SiteswapPattern,
    second: SiteswapPattern,
    graph: SiteswapGraph,
    catches: int,
    tail: int = 0,
) -> Tuple[List[int], int]:
    """
    Alternate between two pattern loops, running each for at least one full period.

    Returns:
        Tuple of (throws from beat 0, number of transitions made)

    Raises:
        BallCountMismatch: If the patterns use different ball counts
    """
    if first.ball_count != second.ball_count:
        raise BallCountMismatch(first.ball_count, second.ball_count)
    path = plan_entry_path(graph, first)
    throws = list(path.throws)
    state = path.end
    current, other = first, second
    transitions = 0
    while _positive(throws) < catches + tail:
        link = plan_transition_path(graph, current, other)
        state = _run_loop(current, state, throws, current.period, stop=link.start)
        for throw in link.throws:
            state = step_state(state, throw)
            throws.append(throw)
        transitions += 1
        current, other = other, current
    _run_loop(current, state, throws, current.period)
    return throws, transitions


def walk_sequence(graph: SiteswapGraph, steps: int, seed: int, tail: int = 0) -> List[int]:
    """
    Random walk from the ground state, then the shortest way back and a cascade tail.

    The first ``steps`` throws are the walk; the rest only lets its balls land.
    """
    walk = random_walk(graph, graph.ground_state, steps, seed)
    if not walk:
        return []
    state = graph.ground_state
    for throw in walk:
        state = step_state(state, throw)
    home = shortest_path(graph, [state], [graph.ground_state])
    return walk + list(home.throws) + [graph.ball_count] * tail


def derive_transition_pairs(
    table: Optional[Dict[int, List[str]]] = None,
    max_height: int = 9,
) -> List[Tuple[str, str]]:
    """
    Unordered pairs of table patterns with equal ball count and disjoint loops.

    Args:
        table: Patterns by ball count, defaults to the built-in table
        max_height: Graph height used to compare loop states

    Returns:
        List of (first, second) pairs in table order
    """
    table = PATTERN_TABLE if table is None else table
    pairs = []
    for ball_count, texts in sorted(table.items()):
        graph = build_graph(max_height, ball_count)
        parsed = [parse_pattern(text) for text in texts]
        for a, b in itertools.combinations(range(len(parsed)), 2):
            if disjoint_loops(graph, parsed[a], parsed[b]):
                pairs.append((texts[a], texts[b]))
    return pairs


# Runs

@dataclass
class RunResult:
    """One simulated run."""

    name: str
    ablation: str
    ball_count: int
    throws: List[int]
    stats: EpisodeStats
    plan: Optional[SchedulePlan] = None
    seed: Optional[int] = None
    target_catches: Optional[int] = None
    coverage: Optional[CoverageMatrix] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.stats.completed

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "name": self.name,
            "ablation": self.ablation,
            "ball_count": self.ball_count,
            "seed": self.seed,
            "throws": len(self.throws),
            "target_catches": self.target_catches,
            "success": self.success,
            "episode": self.stats.summary(),
        }
        if self.plan is not None:
            result["planner"] = {
                "cycles": len(self.plan.cycles()),
                "cache_hits": self.plan.cache_hits,
                "cache_misses": self.plan.cache_misses,
                "all_converged": self.plan.all_converged(),
                "median_solve_time": summarize(self.plan.solve_times())["median"],
                "envelope": self.plan.envelope(),
            }
        result.update(self.details)
        return result


def ablated(config: JuggleConfig, ablation: str) -> JuggleConfig:
    """
    Configuration with one constraint ablation applied.

    Raises:
        ConfigurationError: If the ablation name is unknown
    """
    if ablation not in ABLATIONS:
        raise ConfigurationError(f"Unknown ablation '{ablation}', expected one of: {', '.join(ABLATIONS)}")
    return config.with_ablation(ablation)


def stiffened(config: JuggleConfig, factor: float = 10.0) -> JuggleConfig:
    """Configuration with stiffer, damped, frictionless contacts."""
    return config.model_copy(update={"contact": config.contact.stiffened(factor)})


def make_cache(config: JuggleConfig) -> Optional[CycleCache]:
    """Shared cycle cache for one experiment, None when caching is off."""
    experiment = config.experiment
    if not experiment.cache_enabled:
        return None
    return get_cache_manager(experiment.cache_type, experiment.cache_path, experiment.cache_ttl)


def simulate_throws(
    throws: Sequence[int],
    ball_count: int,
    config: JuggleConfig,
    target_catches: Optional[int] = None,
    cache: Optional[CycleCache] = None,
    collect_trace: bool = False,
) -> Tuple[EpisodeStats, SchedulePlan, Schedule]:
    """
    Schedule, plan and simulate a throw sequence that starts in the ground state.

    Raises:
        NonPositiveFlightTime: If a height cannot be thrown at the configured timing
        TransitionError: If the throws are not legal from the ground state
    """
    check_heights(throws, config.timing)
    _, schedule = initialize_from_ground_state(ball_count, config.timing, config.geometry, config.contact, throws)
    plan = Planner(config, cache).plan_schedule(schedule)
    stats = run_episode(plan, config, target_catches, collect_trace=collect_trace)
    return stats, plan, schedule


def run_pattern(
    text: str,
    config: JuggleConfig,
    catches: Optional[int] = None,
    ablation: str = "none",
    cache: Optional[CycleCache] = None,
    collect_trace: bool = False,
) -> RunResult:
    """
    Enter a pattern from the ground state and juggle it for ``catches`` catches.

    Args:
        text: Pattern digits
        config: Resolved configuration
        catches: Catch target, defaults to ``experiment.catches``
        ablation: Constraint ablation name
        cache: Optional shared cycle cache
        collect_trace: Keep simulation frames

    Returns:
        RunResult: Episode statistics and plan

    Raises:
        PatternError: If the pattern is invalid
    """
    catches = config.experiment.catches if catches is None else catches
    run_config = ablated(config, ablation)
    pattern = parse_pattern(text, _heights(config))
    graph = graph_for(pattern.ball_count, config)
    throws = pattern_sequence(pattern, graph, catches, _tail(config))
    stats, plan, _ = simulate_throws(throws, pattern.ball_count, run_config, catches, cache, collect_trace)
    return RunResult(text, ablation, pattern.ball_count, throws, stats, plan, target_catches=catches)


def run_transition(
    first: str,
    second: str,
    config: JuggleConfig,
    catches: Optional[int] = None,
    ablation: str = "none",
    cache: Optional[CycleCache] = None,
    collect_trace: bool = False,
) -> RunResult:
    """
    Navigate back and forth between two patterns for ``catches`` catches.

    Identical patterns reduce to ``run_pattern``.

    Raises:
        BallCountMismatch: If the patterns use different ball counts
    """
    if first == second:
        return run_pattern(first, config, catches, ablation, cache, collect_trace)
    catches = config.experiment.catches if catches is None else catches
    run_config = ablated(config, ablation)
    a = parse_pattern(first, _heights(config))
    b = parse_pattern(second, _heights(config))
    if a.ball_count != b.ball_count:
        raise BallCountMismatch(a.ball_count, b.ball_count)
    graph = graph_for(a.ball_count, config)
    throws, transitions = transition_sequence(a, b, graph, catches, _tail(config))
    stats, plan, _ = simulate_throws(throws, a.ball_count, run_config, catches, cache, collect_trace)
    return RunResult(
        f"{first}<->{second}", ablation, a.ball_count, throws, stats, plan,
        target_catches=catches, details={"transitions": transitions},
    )


def run_walk_seed(
    ball_count: int,
    steps: int,
    seed: int,
    config: JuggleConfig,
    ablation: str = "none",
    cache: Optional[CycleCache] = None,
) -> RunResult:
    """
    One random walk, simulated until every walk throw was caught or the first drop.

    A zero-length walk makes no throws and yields an empty coverage matrix.
    """
    run_config = ablated(config, ablation)
    graph = graph_for(ball_count, config)
    throws = walk_sequence(graph, steps, seed, _tail(config))
    if not throws:
        stats = EpisodeStats(completed=True)
        return RunResult(f"walk-{ball_count}", ablation, ball_count, [], stats, seed=seed,
                         target_catches=0, coverage=CoverageMatrix())
    target = _positive(throws[:steps])
    stats, plan, schedule = simulate_throws(throws, ball_count, run_config, target, cache)
    until = schedule.time_of(-1) + stats.simulated_time
    coverage = coverage_from_schedule(schedule, 0, steps - 1, until)
    return RunResult(f"walk-{ball_count}", ablation, ball_count, throws, stats, plan,
                     seed=seed, target_catches=target, coverage=coverage)


@dataclass
class WalkSummary:
    """Random walks of one ablation over all seeds."""

    ball_count: int
    steps: int
    ablation: str
    runs: List[RunResult]

    @property
    def catches(self) -> List[int]:
        return [run.stats.consecutive_catches for run in self.runs]

    @property
    def drops(self) -> int:
        return sum(1 for run in self.runs if run.stats.dropped)

    def coverage(self) -> CoverageMatrix:
        matrix = CoverageMatrix()
        for run in self.runs:
            if run.coverage is not None:
                matrix = matrix.merge(run.coverage)
        return matrix

    def drop_causes(self) -> Dict[str, int]:
        return dict(Counter(cause for run in self.runs for _, _, cause in run.stats.drops))

    def to_dict(self) -> Dict[str, Any]:
        coverage = self.coverage()
        return {
            "ball_count": self.ball_count,
            "steps": self.steps,
            "ablation": self.ablation,
            "seeds": [run.seed for run in self.runs],
            "catches": self.catches,
            "catches_until_failure": summarize(self.catches),
            "drops": self.drops,
            "drop_causes": self.drop_causes(),
            "coverage_total": coverage.total,
            "coverage_missing": [list(t) for t in coverage.missing()],
            "coverage_impossible_seen": [list(t) for t in coverage.impossible_seen()],
        }


def run_random_walk(
    ball_count: int,
    steps: int,
    seeds: Sequence[int],
    config: JuggleConfig,
    ablations: Sequence[str] = ("none",),
    on_done: Optional[Callable[[int], None]] = None,
) -> List[WalkSummary]:
    """
    Random walks for every (ablation, seed) pair.

    Args:
        ball_count: Number of balls
        steps: Walk length in throws
        seeds: Generator seeds, one walk each
        config: Resolved configuration
        ablations: Constraint ablations to compare
        on_done: Called with the run index after each finished walk

    Returns:
        List[WalkSummary]: One summary per ablation, runs in seed order

    Raises:
        ConfigurationError: If the seed list is empty or an ablation is unknown
    """
    if not seeds:
        raise ConfigurationError("random walks need at least one seed")
    for ablation in ablations:
        ablated(config, ablation)
    graph_for(ball_count, config)
    cache = make_cache(config)
    jobs = [(ablation, seed) for ablation in ablations for seed in seeds]
    runs = fan_out(
        lambda job: run_walk_seed(ball_count, steps, job[1], config, job[0], cache),
        jobs,
        config.experiment.workers,
        on_done,
    )
    summaries = []
    for i, ablation in enumerate(ablations):
        chunk = runs[i * len(seeds):(i + 1) * len(seeds)]
        summaries.append(WalkSummary(ball_count, steps, ablation, chunk))
    return summaries


@dataclass
class AccuracyReport:
    """Planar touchdown errors grouped by throw height."""

    ball_count: int
    steps: int
    seed: int
    stiff: bool
    errors: Dict[int, List[float]]
    run: Optional[RunResult] = None

    def by_height(self) -> Dict[int, Dict[str, float]]:
        return {height: summarize(values) for height, values in sorted(self.errors.items())}

    def rows(self) -> List[Tuple[int, int, float, float, float]]:
        return [(h, s["count"], s["mean"], s["median"], s["p95"]) for h, s in self.by_height().items()]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ball_count": self.ball_count,
            "steps": self.steps,
            "seed": self.seed,
            "stiff": self.stiff,
            "by_height": {str(h): s for h, s in self.by_height().items()},
            "episode": self.run.stats.summary() if self.run is not None else None,
        }


def run_accuracy(
    ball_count: int,
    steps: int,
    seed: int,
    config: JuggleConfig,
    stiff: bool = False,
) -> AccuracyReport:
    """
    Touchdown accuracy over one random walk.

    Args:
        ball_count: Number of balls
        steps: Walk length in throws
        seed: Generator seed
        config: Resolved configuration
        stiff: Use ten times stiffer and more damped frictionless contacts

    Returns:
        AccuracyReport: Errors per throw height, empty for a zero-length walk
    """
    run_config = stiffened(config) if stiff else config
    run = run_walk_seed(ball_count, steps, seed, run_config, cache=make_cache(run_config))
    errors: Dict[int, List[float]] = {}
    for height, error in run.stats.touchdown_errors:
        errors.setdefault(height, []).append(error)
    return AccuracyReport(ball_count, steps, seed, stiff, errors, run)


def run_patterns(
    texts: Sequence[str],
    config: JuggleConfig,
    catches: Optional[int] = None,
    ablation: str = "none",
    on_done: Optional[Callable[[int], None]] = None,
) -> List[RunResult]:
    """Run several patterns in parallel with one shared cycle cache."""
    cache = make_cache(config)
    return fan_out(
        lambda text: run_pattern(text, config, catches, ablation, cache),
        list(texts),
        config.experiment.workers,
        on_done,
    )


def run_transitions(
    pairs: Sequence[Tuple[str, str]],
    config: JuggleConfig,
    catches: Optional[int] = None,
    ablation: str = "none",
    on_done: Optional[Callable[[int], None]] = None,
) -> List[RunResult]:
    """Run several pattern pairs in parallel with one shared cycle cache."""
    cache = make_cache(config)
    return fan_out(
        lambda pair: run_transition(pair[0], pair[1], config, catches, ablation, cache),
        list(pairs),
        config.experiment.workers,
        on_done,
    )


def experiment_record(config: JuggleConfig, kind: str, results: Any) -> Dict[str, Any]:
    """Self-describing experiment output: kind, results and the resolved configuration."""
    return {"experiment": kind, "results": results, "config": config.model_dump(mode="json")}
