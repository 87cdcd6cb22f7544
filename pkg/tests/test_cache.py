"""
Tests for the cache modules.
"""

import threading
import time
from unittest.mock import patch

import numpy as np
import pytest

from jugglespec.cache import get_cache_manager
from jugglespec.cache.base import CycleCache
from jugglespec.cache.disk_cache import DiskCycleCache
from jugglespec.cache.memory_cache import MemoryCycleCache


def _solved_cycle():
    return {"jerks": np.arange(72, dtype=float).reshape(24, 3), "report": {"status": "optimal"}}


class TestMemoryCycleCache:
    """Tests for the MemoryCycleCache class."""

    def test_set_get(self):
        """Test basic set and get operations."""
        cache = MemoryCycleCache()
        assert cache.set("cycle", "value")
        assert cache.get("cycle") == "value"
        assert cache.get("other") is None

    def test_stores_arrays(self):
        """Test storing a solved cycle with its jerk array."""
        cache = MemoryCycleCache()
        cache.set("cycle", _solved_cycle())
        value = cache.get("cycle")
        assert np.array_equal(value["jerks"], _solved_cycle()["jerks"])

    def test_delete_and_clear(self):
        """Test removing entries."""
        cache = MemoryCycleCache()
        cache.set("a", 1)
        cache.set("b", 2)
        assert cache.delete("a")
        assert not cache.delete("a")
        assert cache.get("a") is None
        assert cache.clear()
        assert cache.get("b") is None

    def test_ttl_expiry(self):
        """Test that expired entries are misses."""
        cache = MemoryCycleCache(ttl=1)
        cache.set("cycle", 1)
        with patch("jugglespec.cache.base.time.time", return_value=time.time() + 5):
            assert cache.get("cycle") is None
        assert cache.get_stats()["entries"] == 0

    def test_zero_ttl_never_expires(self):
        """Test that a ttl of zero keeps entries forever."""
        cache = MemoryCycleCache(ttl=0)
        cache.set("cycle", 1)
        with patch("jugglespec.cache.base.time.time", return_value=time.time() + 1e9):
            assert cache.get("cycle") == 1

    def test_stats(self):
        """Test hit and miss counting."""
        cache = MemoryCycleCache()
        cache.set("cycle", 1)
        cache.get("cycle")
        cache.get("cycle")
        cache.get("missing")
        assert cache.get_stats() == {"hits": 2, "misses": 1, "entries": 1}

    def test_concurrent_access(self):
        """Test sharing one cache between worker threads."""
        cache = MemoryCycleCache()

        def work(offset):
            for i in range(200):
                cache.set(f"{offset}-{i}", i)
                cache.get(f"{offset}-{i}")

        threads = [threading.Thread(target=work, args=(n,)) for n in range(4)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        stats = cache.get_stats()
        assert stats["entries"] == 800
        assert stats["hits"] == 800


class TestDiskCycleCache:
    """Tests for the DiskCycleCache class."""

    def test_set_get(self, tmp_path):
        """Test storing and reading a solved cycle."""
        cache = DiskCycleCache(str(tmp_path / "cycles.db"))
        assert cache.set("cycle", _solved_cycle())
        value = cache.get("cycle")
        assert value["report"] == {"status": "optimal"}
        assert np.array_equal(value["jerks"], _solved_cycle()["jerks"])
        assert cache.get("missing") is None

    def test_persists_between_instances(self, tmp_path):
        """Test that a second cache on the same file sees earlier entries."""
        path = str(tmp_path / "nested" / "cycles.db")
        DiskCycleCache(path).set("cycle", 42)
        assert DiskCycleCache(path).get("cycle") == 42

    def test_delete_and_clear(self, tmp_path):
        """Test removing entries."""
        cache = DiskCycleCache(str(tmp_path / "cycles.db"))
        cache.set("a", 1)
        cache.set("b", 2)
        assert cache.delete("a")
        assert not cache.delete("a")
        assert cache.clear()
        assert cache.get_stats()["entries"] == 0

    def test_ttl_and_prune(self, tmp_path):
        """Test expiry and pruning of old entries."""
        cache = DiskCycleCache(str(tmp_path / "cycles.db"), ttl=10)
        cache.set("cycle", 1)
        assert cache.prune_expired() == 0
        with patch("jugglespec.cache.disk_cache.time.time", return_value=time.time() + 100):
            assert cache.prune_expired() == 1
        assert cache.get("cycle") is None

    def test_prune_without_ttl(self, tmp_path):
        """Test that pruning is a no-op without a ttl."""
        cache = DiskCycleCache(str(tmp_path / "cycles.db"))
        cache.set("cycle", 1)
        assert cache.prune_expired() == 0

    def test_stats(self, tmp_path):
        """Test hit, miss and entry counting."""
        cache = DiskCycleCache(str(tmp_path / "cycles.db"))
        cache.set("cycle", 1)
        cache.get("cycle")
        cache.get("missing")
        assert cache.get_stats() == {"hits": 1, "misses": 1, "entries": 1}


class TestCacheFactory:
    """Tests for get_cache_manager and key generation."""

    def test_memory(self):
        assert isinstance(get_cache_manager("memory"), MemoryCycleCache)

    def test_disk(self, tmp_path):
        cache = get_cache_manager("disk", str(tmp_path / "cycles.db"), ttl=5)
        assert isinstance(cache, DiskCycleCache)
        assert cache.ttl == 5

    def test_disk_needs_path(self):
        with pytest.raises(ValueError, match="cache_path"):
            get_cache_manager("disk")

    def test_unknown_type(self):
        with pytest.raises(ValueError, match="Unsupported"):
            get_cache_manager("redis")

    def test_generate_key(self):
        """Test that keys depend on both the cycle and the configuration."""
        cache = MemoryCycleCache()
        key = cache.generate_key("h0|3,3,3", "abc")
        assert key == cache.generate_key("h0|3,3,3", "abc")
        assert key != cache.generate_key("h0|3,4,4", "abc")
        assert key != cache.generate_key("h0|3,3,3", "abd")
        assert len(key) == 32

    def test_is_abstract(self):
        with pytest.raises(TypeError):
            CycleCache()
