"""
Tests for the config module.
"""

import os
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from jugglespec.config import (
    ContactConfig,
    ExperimentConfig,
    HandGeometryConfig,
    JuggleConfig,
    OptimizerConfig,
    SolverConfig,
    TimingConfig,
    load_config,
)
from jugglespec.errors import ConfigurationError

ENV_VARS = {
    'JUGGLESPEC_WORKERS': '4',
    'JUGGLESPEC_OUTPUT_DIRECTORY': 'env_output',
    'JUGGLESPEC_CACHE_ENABLED': 'false',
    'JUGGLESPEC_CACHE_TYPE': 'disk',
    'JUGGLESPEC_CACHE_PATH': '/tmp/cycles.db',
}


@pytest.fixture
def clean_env():
    """Run a test without any jugglespec environment variables."""
    env = {k: v for k, v in os.environ.items() if not k.startswith('JUGGLESPEC_')}
    with patch.dict(os.environ, env, clear=True):
        yield


@pytest.fixture
def mock_env_vars(clean_env):
    """Set the jugglespec environment variables for one test."""
    with patch.dict(os.environ, ENV_VARS):
        yield


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'juggle.yaml'
    path.write_text(
        "timing:\n"
        "  cycle_time: 0.5\n"
        "contact:\n"
        "  friction: 0.3\n"
        "experiment:\n"
        "  catches: 20\n"
        "  seeds: [1, 2]\n"
    )
    return path


def test_load_config_defaults(clean_env):
    """Test loading configuration with defaults when nothing is set."""
    config = load_config()

    assert config.timing.cycle_time == 0.48
    assert config.timing.beat_time == pytest.approx(0.24)
    assert config.timing.dwell_time == pytest.approx(0.24)
    assert config.optimizer.n_steps == 24
    assert config.contact.stiffness == 1e5
    assert config.experiment.workers == 1
    assert config.experiment.cache_enabled is True
    assert config.experiment.cache_type == 'memory'
    assert config.experiment.seeds == list(range(20))


def test_load_config_from_env(mock_env_vars):
    """Test loading run-environment settings from environment variables."""
    config = load_config()

    assert config.experiment.workers == 4
    assert config.experiment.output_directory == Path('env_output')
    assert config.experiment.cache_enabled is False
    assert config.experiment.cache_type == 'disk'
    assert config.experiment.cache_path == '/tmp/cycles.db'


def test_load_config_from_file(clean_env, config_file):
    """Test that a YAML file overrides only the values it names."""
    config = load_config(config_file)

    assert config.timing.cycle_time == 0.5
    assert config.timing.dwell_ratio == 0.5
    assert config.contact.friction == 0.3
    assert config.contact.stiffness == 1e5
    assert config.experiment.catches == 20
    assert config.experiment.seeds == [1, 2]


def test_load_config_with_overrides(mock_env_vars, config_file):
    """Test that explicit overrides win over the file and the environment."""
    config = load_config(
        config_file,
        workers_override=2,
        output_directory_override=Path('out'),
        cache_enabled_override=True,
        cache_type_override='memory',
        overrides={'contact': {'friction': 0.0}, 'experiment': {'catches': 5}},
    )

    assert config.experiment.workers == 2
    assert config.experiment.output_directory == Path('out')
    assert config.experiment.cache_enabled is True
    assert config.experiment.cache_type == 'memory'
    assert config.experiment.cache_path == '/tmp/cycles.db'  # From environment
    assert config.contact.friction == 0.0
    assert config.experiment.catches == 5
    assert config.timing.cycle_time == 0.5  # From file


def test_missing_config_file(clean_env, tmp_path):
    """Test that a missing file is a configuration error."""
    with pytest.raises(ConfigurationError, match='not found'):
        load_config(tmp_path / 'missing.yaml')


def test_invalid_yaml(clean_env, tmp_path):
    """Test that unparsable YAML is a configuration error."""
    path = tmp_path / 'bad.yaml'
    path.write_text("timing: [unclosed\n")
    with pytest.raises(ConfigurationError, match='not valid YAML'):
        load_config(path)


def test_non_mapping_yaml(clean_env, tmp_path):
    """Test that a top-level list is refused."""
    path = tmp_path / 'list.yaml'
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError, match='mapping'):
        load_config(path)


def test_empty_yaml(clean_env, tmp_path):
    """Test that an empty file means defaults."""
    path = tmp_path / 'empty.yaml'
    path.write_text("")
    assert load_config(path) == JuggleConfig()


def test_unknown_key(clean_env):
    """Test that unknown settings are refused."""
    with pytest.raises(ConfigurationError, match='Invalid configuration'):
        load_config(overrides={'timing': {'tempo': 1.0}})


def test_bad_worker_env(clean_env):
    """Test that a non-integer worker count is refused."""
    with patch.dict(os.environ, {'JUGGLESPEC_WORKERS': 'many'}):
        with pytest.raises(ConfigurationError, match='JUGGLESPEC_WORKERS'):
            load_config()


@pytest.mark.parametrize('overrides', [
    {'timing': {'cycle_time': 0.0}},
    {'timing': {'dwell_ratio': 1.0}},
    {'optimizer': {'n_steps': 3}},
    {'optimizer': {'slope_angle_deg': 95.0}},
    {'optimizer': {'pre_touchdown_window': -0.1}},
    {'solver': {'penalty_growth': 1.0}},
    {'contact': {'time_step': 5e-3}},
    {'contact': {'stiffness': 1e8}},
    {'contact': {'ball_radius': 0.06}},
    {'geometry': {'gravity': (0.0, 0.0, 9.81)}},
    {'experiment': {'seeds': []}},
    {'experiment': {'walk_balls': 10}},
    {'experiment': {'cache_type': 'redis'}},
])
def test_invalid_values(clean_env, overrides):
    """Test that every validator surfaces as a configuration error."""
    with pytest.raises(ConfigurationError):
        load_config(overrides=overrides)


def test_config_is_frozen():
    """Test that resolved configurations cannot be mutated."""
    config = JuggleConfig()
    with pytest.raises(Exception):
        config.timing.cycle_time = 1.0


def test_mirrored_left_hand():
    """Test that the left hand mirrors the right one unless given."""
    geometry = HandGeometryConfig()
    assert np.allclose(geometry.takeoff(1), [-0.35, 0.0, 0.0])
    assert np.allclose(geometry.touchdown(1), [-0.45, 0.0, 0.0])
    custom = HandGeometryConfig(left_takeoff=(-0.3, 0.1, 0.0))
    assert np.allclose(custom.takeoff(1), [-0.3, 0.1, 0.0])


def test_ablation_switches():
    """Test the constraint switches of every ablation."""
    base = OptimizerConfig()
    assert base.with_ablation('none') == base
    assert not base.with_ablation('rollout').rollout
    premature = base.with_ablation('premature')
    assert not premature.premature_contact and not premature.three_throw_scheduling
    assert premature.rollout
    baseline = base.with_ablation('baseline')
    assert not (baseline.rollout or baseline.premature_contact or baseline.three_throw_scheduling)
    with pytest.raises(ConfigurationError):
        base.with_ablation('all')


def test_stiffened_contacts():
    """Test the accuracy-study contact model."""
    stiff = ContactConfig().stiffened()
    assert stiff.stiffness == 1e6
    assert stiff.damping == 1e4
    assert stiff.friction == 0.0


def test_fingerprint():
    """Test that the fingerprint tracks solver-relevant settings only."""
    config = JuggleConfig()
    assert config.fingerprint() == JuggleConfig().fingerprint()
    assert config.fingerprint() == JuggleConfig(experiment=ExperimentConfig(catches=3)).fingerprint()
    assert config.fingerprint() == JuggleConfig(contact=ContactConfig(friction=0.1)).fingerprint()
    assert config.fingerprint() != JuggleConfig(timing=TimingConfig(cycle_time=0.5)).fingerprint()
    assert config.fingerprint() != JuggleConfig(solver=SolverConfig(max_outer_iterations=5)).fingerprint()
