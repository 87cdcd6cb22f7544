"""
Tests for disk_cache.py error handling.
"""

import os
import sqlite3
import threading
from unittest.mock import patch

import pytest

from jugglespec.cache.disk_cache import DiskCycleCache


@pytest.fixture
def corrupted_db_path(tmp_path):
    """Create a file that is not an SQLite database."""
    db_path = os.path.join(tmp_path, "corrupted.db")
    with open(db_path, 'wb') as f:
        f.write(b'Not a valid SQLite database')
    return db_path


def test_disk_cache_error_handling(tmp_path):
    """Test that SQLite errors turn into misses and failed writes."""
    cache = DiskCycleCache(cache_path=os.path.join(tmp_path, "cycles.db"), ttl=3600)

    with patch('sqlite3.connect', side_effect=sqlite3.Error("Mock DB Error")):
        assert cache.set("cycle", {"jerks": [0.0]}) is False
        assert cache.delete("cycle") is False
        assert cache.clear() is False
        assert cache.get("cycle") is None
        assert cache.prune_expired() == 0
        assert cache.get_stats()["entries"] == 0

    assert cache.stats["misses"] == 1


def test_corrupted_database(corrupted_db_path):
    """Test that a corrupted file degrades to an always-missing cache."""
    cache = DiskCycleCache(cache_path=corrupted_db_path)
    assert cache.get("cycle") is None
    assert cache.set("cycle", 1) is False


def test_unpicklable_value(tmp_path):
    """Test that values that cannot be stored are refused."""
    cache = DiskCycleCache(cache_path=os.path.join(tmp_path, "cycles.db"))
    assert cache.set("cycle", lambda: None) is False
    assert cache.get("cycle") is None


class _LockCheckingStats(dict):
    """Stats dictionary that records whether the cache lock was held on every write."""

    def __init__(self, lock, *args):
        super().__init__(*args)
        self.lock = lock
        self.unlocked_writes = 0

    def __setitem__(self, key, value):
        if not self.lock.locked():
            self.unlocked_writes += 1
        super().__setitem__(key, value)


def test_stats_updated_under_lock(tmp_path):
    """Test that hit and miss counters only change while the lock is held."""
    cache = DiskCycleCache(cache_path=os.path.join(tmp_path, "cycles.db"))
    cache.stats = _LockCheckingStats(cache._lock, cache.stats)
    cache.set("cycle", 1)
    assert cache.get("cycle") == 1
    assert cache.get("other") is None
    with patch('sqlite3.connect', side_effect=sqlite3.Error("Mock DB Error")):
        assert cache.get("cycle") is None
    assert cache.stats.unlocked_writes == 0
    assert cache.stats["hits"] == 1
    assert cache.stats["misses"] == 2


def test_concurrent_gets_count_every_lookup(tmp_path):
    """Test that counters add up when worker threads share one cache."""
    cache = DiskCycleCache(cache_path=os.path.join(tmp_path, "cycles.db"))
    cache.set("cycle", 1)

    def lookups(index):
        for _ in range(25):
            cache.get("cycle" if index % 2 else "missing")

    threads = [threading.Thread(target=lookups, args=(i,)) for i in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    stats = cache.get_stats()
    assert stats["hits"] == 100
    assert stats["misses"] == 100
