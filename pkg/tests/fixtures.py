"""
Common fixtures for pytest.
"""

import os
import pytest
from pathlib import Path
from unittest.mock import MagicMock

from jugglespec.config import JuggleConfig, ExperimentConfig


# Create test output directory fixture
@pytest.fixture
def test_output_dir():
    """Create and return a test output directory."""
    output_dir = Path(__file__).parent.parent / "test_output"
    os.makedirs(output_dir, exist_ok=True)
    return output_dir


@pytest.fixture
def juggle_config():
    """Default configuration with the cache disabled."""
    return JuggleConfig(experiment=ExperimentConfig(cache_enabled=False))


@pytest.fixture
def small_config():
    """Configuration for short walks over a small graph."""
    return JuggleConfig(experiment=ExperimentConfig(
        catches=10, seeds=[0, 1], walk_steps=12, walk_balls=3, max_height=5, cache_enabled=False,
    ))


# Mock cache manager fixture
@pytest.fixture
def mock_cache_manager():
    """Create a mock cache manager for testing."""
    mock_cache = MagicMock()
    mock_cache.get.return_value = None  # Default to cache miss
    mock_cache.set.return_value = True  # Default to successful cache set
    mock_cache.get_stats.return_value = {"entries": 0, "hits": 0, "misses": 0}
    mock_cache.generate_key.side_effect = lambda signature, fingerprint: f"{fingerprint}:{signature}"
    return mock_cache
