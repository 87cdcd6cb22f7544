"""
In-memory solved-cycle cache.
"""

import threading
import time
from typing import Any, Dict, Optional

from .base import CycleCache


class MemoryCycleCache(CycleCache):
    """Dictionary-backed cache, safe to share between worker threads."""

    def __init__(self, ttl: int = 0):
        super().__init__(ttl)
        self._cache: Dict[str, Any] = {}
        self._timestamps: Dict[str, float] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[Any]:
        """
        Get a solved cycle.

        Args:
            key: Cache key

        Returns:
            The cached value or None if not found or expired
        """
        with self._lock:
            if key not in self._cache:
                self.stats["misses"] += 1
                return None

            if not self.is_fresh(self._timestamps.get(key, 0)):
                del self._cache[key]
                del self._timestamps[key]
                self.stats["misses"] += 1
                return None

            self.stats["hits"] += 1
            return self._cache[key]

    def set(self, key: str, value: Any) -> bool:
        with self._lock:
            self._cache[key] = value
            self._timestamps[key] = time.time()
        return True

    def delete(self, key: str) -> bool:
        with self._lock:
            if key in self._cache:
                del self._cache[key]
                del self._timestamps[key]
                return True
        return False

    def clear(self) -> bool:
        with self._lock:
            self._cache = {}
            self._timestamps = {}
        return True

    def get_stats(self) -> Dict[str, int]:
        """
        Get cache statistics.

        Returns:
            Dict with cache statistics including:
            - hits: Number of cache hits
            - misses: Number of cache misses
            - entries: Number of entries in cache
        """
        with self._lock:
            stats = self.stats.copy()
            stats["entries"] = len(self._cache)
        return stats
