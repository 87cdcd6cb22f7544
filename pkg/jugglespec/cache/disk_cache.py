"""
SQLite-backed solved-cycle cache.

Solved cycles survive between runs, so a cycle library built once by
``jugglespec plan --all-triples`` is reused by later experiments with the
same configuration fingerprint.
"""

import os
import pickle
import sqlite3
import threading
import time
from typing import Any, Dict, Optional

from .base import CycleCache


class DiskCycleCache(CycleCache):
    """Disk-based cache using SQLite. Storage failures count as misses."""

    def __init__(self, cache_path: str, ttl: int = 0):
        """
        Initialize the disk cache.

        Args:
            cache_path: Path to the SQLite file; parent directories are created
            ttl: Time-to-live for entries in seconds (0 never expires)
        """
        super().__init__(ttl)
        directory = os.path.dirname(os.path.abspath(cache_path))
        os.makedirs(directory, exist_ok=True)
        self.db_path = cache_path
        self._lock = threading.Lock()
        self._init_db()

    def _init_db(self):
        """Create the cycles table if it doesn't exist."""
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()
            cursor.execute('''
                CREATE TABLE IF NOT EXISTS cycles (
                    key TEXT PRIMARY KEY,
                    value BLOB,
                    timestamp REAL
                )
            ''')
            conn.commit()
            conn.close()
        except Exception:
            # Errors are handled per call
            pass

    def _count(self, name: str) -> None:
        with self._lock:
            self.stats[name] += 1

    def get(self, key: str) -> Optional[Any]:
        """
        Get a solved cycle.

        Args:
            key: Cache key

        Returns:
            The cached value or None if not found, expired or unreadable
        """
        try:
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute("SELECT value, timestamp FROM cycles WHERE key = ?", (key,))
                row = cursor.fetchone()
                conn.close()

            if not row:
                self._count("misses")
                return None

            value_blob, timestamp = row
            if not self.is_fresh(timestamp):
                self.delete(key)
                self._count("misses")
                return None

            value = pickle.loads(value_blob)
            self._count("hits")
            return value
        except Exception:
            self._count("misses")
            return None

    def set(self, key: str, value: Any) -> bool:
        try:
            value_blob = pickle.dumps(value)
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute(
                    "INSERT OR REPLACE INTO cycles VALUES (?, ?, ?)",
                    (key, value_blob, time.time())
                )
                conn.commit()
                conn.close()
            return True
        except Exception:
            return False

    def delete(self, key: str) -> bool:
        try:
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute("DELETE FROM cycles WHERE key = ?", (key,))
                rows_affected = cursor.rowcount
                conn.commit()
                conn.close()
            return rows_affected > 0
        except Exception:
            return False

    def clear(self) -> bool:
        try:
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute("DELETE FROM cycles")
                conn.commit()
                conn.close()
            return True
        except Exception:
            return False

    def get_stats(self) -> Dict[str, int]:
        with self._lock:
            stats = self.stats.copy()
        try:
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute("SELECT COUNT(*) FROM cycles")
                stats["entries"] = cursor.fetchone()[0]
                conn.close()
        except Exception:
            stats["entries"] = 0
        return stats

    def prune_expired(self) -> int:
        """
        Remove all expired entries.

        Returns:
            int: Number of entries pruned
        """
        if self.ttl <= 0:
            return 0
        try:
            with self._lock:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute("DELETE FROM cycles WHERE timestamp < ?", (time.time() - self.ttl,))
                pruned = cursor.rowcount
                conn.commit()
                conn.close()
            return pruned
        except Exception:
            return 0
