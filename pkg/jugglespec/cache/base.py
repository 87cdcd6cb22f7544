"""
Base interface of the solved-cycle cache.
"""

import abc
import hashlib
import time
from typing import Any, Dict, Optional


class CycleCache(abc.ABC):
    """Abstract base class for solved-cycle caches.

    Values are whatever the planner stores for a cycle (jerks and solve
    report); keys come from ``generate_key``.
    """

    def __init__(self, ttl: int = 0):
        """
        Initialize the cache interface.

        Args:
            ttl: Time-to-live for entries in seconds; 0 or less never expires
        """
        self.ttl = ttl
        self.stats = {
            "hits": 0,
            "misses": 0
        }

    @abc.abstractmethod
    def get(self, key: str) -> Optional[Any]:
        """
        Get a solved cycle.

        Args:
            key: Cache key

        Returns:
            The cached value or None if not found
        """

    @abc.abstractmethod
    def set(self, key: str, value: Any) -> bool:
        """
        Store a solved cycle.

        Args:
            key: Cache key
            value: Value to cache

        Returns:
            bool: Success status
        """

    @abc.abstractmethod
    def delete(self, key: str) -> bool:
        pass

    @abc.abstractmethod
    def clear(self) -> bool:
        pass

    @abc.abstractmethod
    def get_stats(self) -> Dict[str, int]:
        """
        Get cache statistics.

        Returns:
            Dict with hits, misses and entries
        """

    def generate_key(self, signature: str, fingerprint: str) -> str:
        """
        Generate a cache key for a cycle.

        Args:
            signature: Canonical description of the cycle
            fingerprint: Hash of the configuration that shaped the solve

        Returns:
            str: Cache key
        """
        return hashlib.md5(f"{signature}|{fingerprint}".encode()).hexdigest()

    def is_fresh(self, timestamp: float) -> bool:
        """
        Check if an entry is still fresh based on its timestamp.

        Args:
            timestamp: Entry timestamp

        Returns:
            bool: True if entry is still fresh
        """
        # ttl of 0 or less never expires
        if self.ttl <= 0:
            return True

        return time.time() - timestamp < self.ttl
