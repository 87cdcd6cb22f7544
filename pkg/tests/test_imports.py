"""
Test the imports from the jugglespec package.
"""


def test_imports():
    """Test that all modules can be imported from the jugglespec package."""
    from jugglespec import ballistics, cache, config, cycle, errors, harness, patterns
    from jugglespec import planner, simulator, siteswap, solver, template, trajectory, utils

    from jugglespec.ballistics import Schedule, predict_touchdown, takeoff_velocity
    from jugglespec.cache import CycleCache, get_cache_manager
    from jugglespec.config import JuggleConfig, load_config
    from jugglespec.cycle import active_constraints, assemble_cycle
    from jugglespec.harness import run_pattern, run_random_walk
    from jugglespec.planner import Planner, cycle_spec_for_heights
    from jugglespec.simulator import initialize_from_ground_state, run_episode, step
    from jugglespec.siteswap import build_graph, parse_pattern, plan_entry, plan_transition
    from jugglespec.solver import solve
    from jugglespec.trajectory import JerkTrajectory
    from jugglespec import __version__

    assert __version__ == "0.1.0"
