#!/usr/bin/env -S uv run
# /// script
# requires-python = ">=3.12"
# dependencies = [
#     "typer>=0.9.0",
#     "rich>=13.6.0",
#     "python-dotenv>=1.0.0",
#     "pydantic>=2.5.0",
#     "pyyaml>=6.0.0",
#     "numpy>=1.26.0",
#     "scipy>=1.11.0",
# ]
# ///

import sys
import traceback
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

# Make direct invocation of main.py work by adding parent directory to path
# to ensure the jugglespec package can be found
script_dir = Path(__file__).resolve().parent
sys.path.insert(0, str(script_dir))

from jugglespec.config import ABLATIONS, JuggleConfig, load_config
from jugglespec.errors import ConfigurationError, PatternError
from jugglespec.harness import (
    CATCH_HEIGHTS,
    PREVIOUS_HEIGHTS,
    RunResult,
    derive_transition_pairs,
    experiment_record,
    graph_for,
    make_cache,
    pattern_sequence,
    run_accuracy,
    run_pattern,
    run_patterns,
    run_random_walk,
    run_transitions,
    structurally_possible,
)
from jugglespec.patterns import STABILITY_SUITE, all_patterns
from jugglespec.planner import ACCELERATION_ENVELOPE, SPEED_ENVELOPE, Planner, cycle_spec_for_heights
from jugglespec.simulator import EVENT_COLUMNS, initialize_from_ground_state
from jugglespec.siteswap import ALL_HEIGHTS, DEFAULT_HEIGHTS, parse_pattern, pattern_states
from jugglespec.template import get_default_template, load_custom_template, render_template
from jugglespec.utils import format_results, resolve_output_dir, sanitize_filename, summarize, write_csv, write_jsonl

# Initialize Typer app
app = typer.Typer(help="Siteswap juggling planner and contact-physics verifier")
console = Console()


@dataclass
class CliState:
    """Options shared by every command."""

    config_file: Optional[Path] = None
    workers: Optional[int] = None
    cache: Optional[bool] = None
    cache_type: Optional[str] = None
    output_dir: Optional[Path] = None
    verbose: bool = False
    quiet: bool = False


@app.callback()
def configure(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Option(
        None, "--config", "-c", help="YAML configuration file"
    ),
    workers: Optional[int] = typer.Option(
        None, "--workers", "-w", help="Worker threads for independent runs (default: from config)"
    ),
    cache: Optional[bool] = typer.Option(
        None, "--cache/--no-cache", help="Reuse solved cycles (default: from config)"
    ),
    cache_type: Optional[str] = typer.Option(
        None, "--cache-type", help="Cycle cache type (memory, disk)"
    ),
    output_dir: Optional[Path] = typer.Option(
        None, "--output-dir", "-d", help="Directory for reports, statistics and traces"
    ),
    verbose: bool = typer.Option(
        False, "--verbose", "-v", help="Enable verbose output"
    ),
    quiet: bool = typer.Option(
        False, "--quiet", "-q", help="Only print results and errors"
    ),
):
    """
    Plan siteswap throw sequences, optimize hand trajectories and verify them in simulation.
    """
    ctx.obj = CliState(config_file, workers, cache, cache_type, output_dir, verbose, quiet)


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj if isinstance(ctx.obj, CliState) else CliState()


def _load(state: CliState, overrides: Optional[Dict[str, Any]] = None) -> JuggleConfig:
    config = load_config(
        config_file=state.config_file,
        workers_override=state.workers,
        output_directory_override=state.output_dir,
        cache_enabled_override=state.cache,
        cache_type_override=state.cache_type,
        overrides=overrides,
    )
    if state.verbose:
        experiment = config.experiment
        console.print(f"Configuration fingerprint: [bold]{config.fingerprint()[:12]}[/bold]")
        console.print(f"Workers: [bold]{experiment.workers}[/bold]")
        if experiment.cache_enabled:
            console.print(f"Cycle cache: [bold]{experiment.cache_type}[/bold]")
    return config


def _output_dir(state: CliState, config: JuggleConfig) -> Path:
    # If we're running in a test environment, use test_output directory
    if state.output_dir is None and 'pytest' in sys.modules:
        return resolve_output_dir(None)
    return resolve_output_dir(config.experiment.output_directory)


def _fail(error: Exception, state: CliState) -> NoReturn:
    code = 2 if isinstance(error, (ConfigurationError, ValidationError, FileNotFoundError)) else 1
    console.print(f"[bold red]Error:[/bold red] {str(error)}")
    if state.verbose:
        console.print(traceback.format_exc())
    raise typer.Exit(code)


def _progress(state: CliState) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}[/bold blue]"),
        BarColumn(bar_width=40),
        TextColumn("[bold]{task.completed}/{task.total}[/bold]"),
        TimeElapsedColumn(),
        console=console,
        transient=not state.verbose,
        disable=state.quiet,
    )


def _save(
    state: CliState,
    config: JuggleConfig,
    name: str,
    record: Dict[str, Any],
    output_format: str,
) -> Path:
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    suffix = "yaml" if output_format.lower() == "yaml" else "json"
    path = _output_dir(state, config) / f"{sanitize_filename(name)}_{timestamp}.{suffix}"
    path.write_text(format_results(record, output_format))
    if not state.quiet:
        console.print(f"Results saved to: [bold green]{path}[/bold green]")
    return path


def _report(
    state: CliState,
    config: JuggleConfig,
    path: Path,
    template_path: Optional[Path],
    **values: str,
) -> None:
    template = load_custom_template(template_path) if template_path is not None else get_default_template()
    values.setdefault("configuration", format_results(config.model_dump(mode="json"), "yaml"))
    report_path = path.with_suffix(".md")
    report_path.write_text(render_template(template, **values))
    if not state.quiet:
        console.print(f"Report saved to: [bold green]{report_path}[/bold green]")


def _runs_table(title: str, results: List[Any]) -> Table:
    table = Table(title=title)
    table.add_column("Run")
    table.add_column("Ablation")
    table.add_column("Balls", justify="right")
    table.add_column("Catches", justify="right")
    table.add_column("Drop")
    table.add_column("Cache hits", justify="right")
    table.add_column("Result")
    for result in results:
        drop = result.stats.drops[0] if result.stats.drops else None
        hits = f"{result.plan.cache_hits}/{result.plan.cache_hits + result.plan.cache_misses}" if result.plan else "-"
        table.add_row(
            result.name,
            result.ablation,
            str(result.ball_count),
            f"{result.stats.consecutive_catches}/{result.target_catches}",
            f"{drop[2]} at {drop[0]:.2f} s" if drop else "",
            hits,
            "[green]stable[/green]" if result.success else "[red]dropped[/red]",
        )
    return table


def _runs_summary(results: List[Any]) -> str:
    stable = sum(1 for r in results if r.success)
    return f"{stable}/{len(results)} runs completed their catch target"


@app.command()
def validate(
    ctx: typer.Context,
    pattern: str = typer.Argument(..., help="Vanilla siteswap, e.g. 423"),
    allow_ones: bool = typer.Option(
        False, "--allow-ones", help="Accept height-1 throws"
    ),
    width: int = typer.Option(
        9, "--width", help="State width used to list the loop states"
    ),
):
    """
    Validate a siteswap and show its ball count and loop states.

    Exits with 0 when the pattern is valid and 1 otherwise.
    """
    state = _state(ctx)
    try:
        parsed = parse_pattern(pattern, ALL_HEIGHTS if allow_ones else DEFAULT_HEIGHTS)
    except PatternError as e:
        console.print(f"[bold red]Invalid:[/bold red] {pattern}: {str(e)}")
        raise typer.Exit(1)
    except Exception as e:
        _fail(e, state)

    console.print(f"[bold green]Valid:[/bold green] {parsed} juggles {parsed.ball_count} balls with period {parsed.period}")
    if not state.quiet:
        states = pattern_states(parsed, max(width, parsed.max_height, 1))
        console.print("Loop states: " + ", ".join(str(s) for s in states))


@app.command()
def graph(
    ctx: typer.Context,
    balls: int = typer.Argument(..., help="Number of balls"),
    height: Optional[int] = typer.Option(
        None, "--height", "-H", help="Maximum throw height (default: from config)"
    ),
    output_file: Optional[Path] = typer.Option(
        None, "--output", "-o", help="Write the adjacency listing to this file"
    ),
):
    """
    Build the siteswap state graph and print or export its adjacency listing.
    """
    state = _state(ctx)
    try:
        config = _load(state)
        built = graph_for(balls, config, height)
        listing = built.export_adjacency()
        console.print(
            f"{built.ball_count} balls, height {built.max_height}: "
            f"[bold]{len(built.states)}[/bold] states, [bold]{len(built.edges)}[/bold] edges"
        )
        if output_file is not None:
            output_file.write_text(listing + "\n")
            if not state.quiet:
                console.print(f"Adjacency saved to: [bold green]{output_file}[/bold green]")
        elif not state.quiet:
            console.print(listing)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


@app.command()
def plan(
    ctx: typer.Context,
    pattern: Optional[str] = typer.Argument(None, help="Pattern to plan from the ground state"),
    catches: int = typer.Option(
        20, "--catches", "-n", help="Throws to plan after the entry"
    ),
    all_triples: bool = typer.Option(
        False, "--all-triples", help="Solve every possible (previous, incoming, target) cycle"
    ),
    steps: Optional[int] = typer.Option(
        None, "--steps", help="Re-solve planned cycles with this many jerk steps and report the takeoff change"
    ),
    trajectory_out: Optional[Path] = typer.Option(
        None, "--trajectory-out", help="JSON-lines file for per-step hand trajectories"
    ),
    schedule_out: Optional[Path] = typer.Option(
        None, "--schedule-out", help="JSON-lines file for the takeoff and touchdown schedule (default: in the output directory)"
    ),
    output_format: str = typer.Option(
        "json", "--format", "-f", help="Solve report format (json, yaml)"
    ),
):
    """
    Plan hand trajectories and report solve statistics and the motion envelope.
    """
    state = _state(ctx)
    try:
        if pattern is None and not all_triples:
            console.print("[bold red]Error:[/bold red] Either a pattern or --all-triples must be provided.")
            raise typer.Exit(2)
        config = _load(state)
        record: Dict[str, Any] = {}

        if all_triples:
            record["library"] = _solve_library(state, config)

        if pattern is not None:
            parsed = parse_pattern(pattern)
            throws = pattern_sequence(parsed, graph_for(parsed.ball_count, config), catches)
            _, schedule = initialize_from_ground_state(parsed.ball_count, config.timing, config.geometry, config.contact, throws)
            planner = Planner(config, make_cache(config))
            with _progress(state) as progress:
                progress.add_task(f"Planning {pattern}", total=None)
                planned = planner.plan_schedule(schedule)
            cycles = planned.cycles()
            envelope = planned.envelope()
            timing = summarize(planned.solve_times())
            record["pattern"] = {
                "pattern": pattern,
                "throws": throws,
                "cycles": [c.to_record() for c in cycles],
                "median_solve_time": timing["median"],
                "envelope": envelope,
                "all_converged": planned.all_converged(),
                "cache_hits": planned.cache_hits,
            }

            table = Table(title=f"Planned cycles of {pattern}")
            table.add_column("Cycles", justify="right")
            table.add_column("Converged", justify="right")
            table.add_column("Median solve", justify="right")
            table.add_column("Peak speed", justify="right")
            table.add_column("Peak accel.", justify="right")
            table.add_row(
                str(len(cycles)),
                str(sum(1 for c in cycles if c.report.converged)),
                f"{timing['median'] * 1000:.1f} ms",
                f"{envelope['peak_speed']:.2f} / {SPEED_ENVELOPE:.0f} m/s",
                f"{envelope['peak_acceleration']:.0f} / {ACCELERATION_ENVELOPE:.0f} m/s²",
            )
            console.print(table)

            if steps is not None:
                distinct = {(c.hand, c.previous, c.incoming, c.target): c for c in cycles}
                deltas = [planner.refinement_delta(schedule, c, steps) for c in distinct.values()]
                record["pattern"]["refinement"] = {"steps": steps, "takeoff_velocity_change": summarize(deltas)}
                worst = max(deltas) if deltas else 0.0
                console.print(f"Takeoff velocity change at {steps} steps: max [bold]{worst:.2e}[/bold] m/s")

            schedule_path = schedule_out or _output_dir(state, config) / f"{sanitize_filename(pattern)}_schedule.jsonl"
            count = write_jsonl(schedule_path, schedule.to_records())
            record["pattern"]["schedule"] = str(schedule_path)
            if not state.quiet:
                console.print(f"{count} schedule entries saved to: [bold green]{schedule_path}[/bold green]")

            if trajectory_out is not None:
                count = write_jsonl(trajectory_out, planned.trajectory_records())
                if not state.quiet:
                    console.print(f"{count} trajectory samples saved to: [bold green]{trajectory_out}[/bold green]")

        _save(state, config, f"plan_{pattern or 'library'}", experiment_record(config, "plan", record), output_format)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


def _solve_library(state: CliState, config: JuggleConfig) -> Dict[str, Any]:
    """Solve one cycle per possible height triple and summarize the solve times."""
    triples = [
        (p, i, t)
        for p in PREVIOUS_HEIGHTS for i in CATCH_HEIGHTS for t in CATCH_HEIGHTS
        if structurally_possible(p, i, t)
    ]
    planner = Planner(config, make_cache(config))
    times, failed = [], []
    with _progress(state) as progress:
        task = progress.add_task("Solving cycle library", total=len(triples))
        for triple in triples:
            spec = cycle_spec_for_heights(config, 0, *triple)
            _, report, _ = planner.solve_spec(spec, 0)
            times.append(report.wall_time)
            if not report.converged:
                failed.append(list(triple))
            progress.advance(task)
    timing = summarize(times)
    console.print(
        f"Cycle library: [bold]{len(triples)}[/bold] cycles, median solve "
        f"[bold]{timing['median'] * 1000:.1f} ms[/bold], {len(failed)} not converged"
    )
    return {"cycles": len(triples), "solve_time": timing, "not_converged": failed}


def _write_events(path: Path, results: List[RunResult], state: CliState) -> None:
    """Write each run's event log as CSV; with several runs the run name is appended to the file stem."""
    for result in results:
        target = path if len(results) == 1 else path.with_name(f"{path.stem}_{sanitize_filename(result.name)}{path.suffix}")
        rows = [[record[column] for column in EVENT_COLUMNS] for record in (e.to_record() for e in result.stats.events)]
        count = write_csv(target, EVENT_COLUMNS, rows)
        if not state.quiet:
            console.print(f"{count} events of {result.name} saved to: [bold green]{target}[/bold green]")


@app.command()
def pattern(
    ctx: typer.Context,
    patterns: Optional[List[str]] = typer.Argument(None, help="Patterns to juggle"),
    catches: Optional[int] = typer.Option(
        None, "--catches", "-n", help="Consecutive catches per pattern (default: from config)"
    ),
    ablation: str = typer.Option(
        "none", "--ablation", "-a", help=f"Constraint ablation ({', '.join(ABLATIONS)})"
    ),
    suite: bool = typer.Option(
        False, "--suite", help="Run the representative stability suite"
    ),
    table: bool = typer.Option(
        False, "--table", help="Run every pattern of the built-in table"
    ),
    trace: bool = typer.Option(
        False, "--trace", help="Write JSON-lines simulation traces (single pattern only)"
    ),
    events_out: Optional[Path] = typer.Option(
        None, "--events-out", help="CSV file for the simulator event log, one per pattern when several run"
    ),
    output_format: str = typer.Option(
        "json", "--format", "-f", help="Statistics format (json, yaml)"
    ),
    template_path: Optional[Path] = typer.Option(
        None, "--template", "-t", help="Custom report template file path"
    ),
):
    """
    Enter patterns from the ground state and juggle each to the catch target or the first drop.

    Exits with 1 if any pattern drops.
    """
    state = _state(ctx)
    try:
        texts = list(patterns or [])
        if suite:
            texts += STABILITY_SUITE
        if table:
            texts += all_patterns()
        if not texts:
            console.print("[bold red]Error:[/bold red] Provide patterns, --suite or --table.")
            raise typer.Exit(2)
        config = _load(state)
        for text in texts:
            parse_pattern(text, ALL_HEIGHTS if config.experiment.allow_one_throws else DEFAULT_HEIGHTS)

        if trace and len(texts) == 1:
            with _progress(state) as progress:
                progress.add_task(f"Juggling {texts[0]}", total=None)
                results = [run_pattern(texts[0], config, catches, ablation, make_cache(config), collect_trace=True)]
            trace_path = _output_dir(state, config) / f"{sanitize_filename(texts[0])}_trace.jsonl"
            write_jsonl(trace_path, results[0].stats.traces)
            if not state.quiet:
                console.print(f"Trace saved to: [bold green]{trace_path}[/bold green]")
        else:
            with _progress(state) as progress:
                task = progress.add_task("Juggling patterns", total=len(texts))
                results = run_patterns(texts, config, catches, ablation, lambda _: progress.advance(task))

        console.print(_runs_table(f"Patterns ({ablation})", results))
        if events_out is not None:
            _write_events(events_out, results, state)
        record = experiment_record(config, "pattern", [r.to_dict() for r in results])
        path = _save(state, config, f"pattern_{ablation}", record, output_format)
        _report(
            state, config, path, template_path,
            title=f"pattern stability ({ablation})",
            outcome=_runs_summary(results),
            statistics=format_results({r.name: r.stats.summary() for r in results}, "yaml"),
            planner=format_results({r.name: r.to_dict().get("planner") for r in results}, "yaml"),
        )
        if not all(r.success for r in results):
            raise typer.Exit(1)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


@app.command()
def transition(
    ctx: typer.Context,
    first: Optional[str] = typer.Argument(None, help="First pattern"),
    second: Optional[str] = typer.Argument(None, help="Second pattern"),
    catches: Optional[int] = typer.Option(
        None, "--catches", "-n", help="Consecutive catches per pair (default: from config)"
    ),
    ablation: str = typer.Option(
        "none", "--ablation", "-a", help=f"Constraint ablation ({', '.join(ABLATIONS)})"
    ),
    all_pairs: bool = typer.Option(
        False, "--all", help="Run every table pair with disjoint loops"
    ),
    events_out: Optional[Path] = typer.Option(
        None, "--events-out", help="CSV file for the simulator event log, one per pair when several run"
    ),
    output_format: str = typer.Option(
        "json", "--format", "-f", help="Statistics format (json, yaml)"
    ),
):
    """
    Navigate back and forth between two patterns' loops.

    Exits with 1 if any pair drops.
    """
    state = _state(ctx)
    try:
        if all_pairs:
            pairs = derive_transition_pairs()
            console.print(f"Derived [bold]{len(pairs)}[/bold] transition pairs with disjoint loops")
        elif first is not None and second is not None:
            pairs = [(first, second)]
        else:
            console.print("[bold red]Error:[/bold red] Provide two patterns or --all.")
            raise typer.Exit(2)
        config = _load(state)

        with _progress(state) as progress:
            task = progress.add_task("Juggling transitions", total=len(pairs))
            results = run_transitions(pairs, config, catches, ablation, lambda _: progress.advance(task))

        console.print(_runs_table(f"Transitions ({ablation})", results))
        if events_out is not None:
            _write_events(events_out, results, state)
        record = experiment_record(config, "transition", {
            "pairs": len(pairs),
            "runs": [r.to_dict() for r in results],
        })
        _save(state, config, f"transition_{ablation}", record, output_format)
        if not all(r.success for r in results):
            raise typer.Exit(1)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


@app.command()
def walk(
    ctx: typer.Context,
    balls: Optional[int] = typer.Option(
        None, "--balls", "-b", help="Number of balls (default: from config)"
    ),
    steps: Optional[int] = typer.Option(
        None, "--steps", "-s", help="Throws per walk (default: from config)"
    ),
    seeds: Optional[int] = typer.Option(
        None, "--seeds", help="Number of seeds, starting at --seed-start (default: seeds from config)"
    ),
    seed_start: int = typer.Option(
        0, "--seed-start", help="First seed when --seeds is given"
    ),
    ablations: Optional[List[str]] = typer.Option(
        None, "--ablation", "-a", help="Constraint ablation, repeatable"
    ),
    heatmap: bool = typer.Option(
        True, "--heatmap/--no-heatmap", help="Print the coverage heatmap"
    ),
    output_format: str = typer.Option(
        "json", "--format", "-f", help="Statistics format (json, yaml)"
    ),
):
    """
    Random walks on the siteswap graph with catches-until-failure and coverage statistics.

    Exits with 1 if any walk of the unablated configuration drops.
    """
    state = _state(ctx)
    try:
        config = _load(state)
        experiment = config.experiment
        balls = experiment.walk_balls if balls is None else balls
        steps = experiment.walk_steps if steps is None else steps
        seed_list = list(range(seed_start, seed_start + seeds)) if seeds is not None else list(experiment.seeds)
        names = list(ablations or ["none"])

        with _progress(state) as progress:
            task = progress.add_task(f"Random walks, {balls} balls", total=len(seed_list) * len(names))
            summaries = run_random_walk(balls, steps, seed_list, config, names, lambda _: progress.advance(task))

        table = Table(title=f"Random walks: {balls} balls, {steps} throws, {len(seed_list)} seeds")
        table.add_column("Ablation")
        table.add_column("Drops", justify="right")
        table.add_column("Mean catches", justify="right")
        table.add_column("Median catches", justify="right")
        table.add_column("Missing triples", justify="right")
        for summary in summaries:
            stats = summarize(summary.catches)
            table.add_row(
                summary.ablation,
                f"{summary.drops}/{len(summary.runs)}",
                f"{stats['mean']:.1f}",
                f"{stats['median']:.1f}",
                str(len(summary.coverage().missing())),
            )
        console.print(table)

        out = _output_dir(state, config)
        stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        for summary in summaries:
            coverage = summary.coverage()
            name = f"walk_{balls}_{summary.ablation}_{stamp}"
            write_csv(out / f"{name}_coverage.csv", ["previous", "incoming", "target", "count"], coverage.rows())
            write_csv(out / f"{name}_catches.csv", ["seed", "catches", "dropped"],
                      [(r.seed, r.stats.consecutive_catches, r.stats.dropped) for r in summary.runs])
            (out / f"{name}_heatmap.txt").write_text(coverage.heatmap() + "\n")
            if heatmap and not state.quiet:
                console.print(Panel(coverage.heatmap(), title=f"Coverage ({summary.ablation})"))

        record = experiment_record(config, "walk", [s.to_dict() for s in summaries])
        _save(state, config, f"walk_{balls}", record, output_format)
        if any(s.drops for s in summaries if s.ablation == "none"):
            raise typer.Exit(1)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


@app.command()
def accuracy(
    ctx: typer.Context,
    balls: Optional[int] = typer.Option(
        None, "--balls", "-b", help="Number of balls (default: from config)"
    ),
    steps: int = typer.Option(
        5000, "--steps", "-s", help="Throws in the walk"
    ),
    seed: int = typer.Option(
        0, "--seed", help="Walk seed"
    ),
    stiff: bool = typer.Option(
        False, "--stiff", help="Ten times stiffer and more damped frictionless contacts"
    ),
    output_format: str = typer.Option(
        "json", "--format", "-f", help="Statistics format (json, yaml)"
    ),
):
    """
    Planar touchdown error per throw height over one random walk.
    """
    state = _state(ctx)
    try:
        config = _load(state)
        balls = config.experiment.walk_balls if balls is None else balls
        with _progress(state) as progress:
            progress.add_task(f"Accuracy walk, {balls} balls", total=None)
            report = run_accuracy(balls, steps, seed, config, stiff)

        table = Table(title="Touchdown error" + (" (stiff contacts)" if stiff else ""))
        table.add_column("Height", justify="right")
        table.add_column("Catches", justify="right")
        table.add_column("Mean", justify="right")
        table.add_column("Median", justify="right")
        table.add_column("p95", justify="right")
        for height, count, mean, median, p95 in report.rows():
            table.add_row(str(height), str(count), f"{mean * 1000:.2f} mm", f"{median * 1000:.2f} mm", f"{p95 * 1000:.2f} mm")
        console.print(table)

        out = _output_dir(state, config)
        name = f"accuracy_{balls}_{'stiff' if stiff else 'default'}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        write_csv(out / f"{name}.csv", ["height", "count", "mean", "median", "p95"], report.rows())
        _save(state, config, f"accuracy_{balls}", experiment_record(config, "accuracy", report.to_dict()), output_format)
        if report.run is not None and report.run.stats.dropped:
            raise typer.Exit(1)
    except typer.Exit:
        raise
    except Exception as e:
        _fail(e, state)


if __name__ == "__main__":
    app()
