"""
Solved-cycle cache for jugglespec.
"""

from typing import Optional

from .base import CycleCache
from .memory_cache import MemoryCycleCache
from .disk_cache import DiskCycleCache

__all__ = ["CycleCache", "MemoryCycleCache", "DiskCycleCache", "get_cache_manager"]


def get_cache_manager(cache_type: str = "memory", cache_path: Optional[str] = None, ttl: int = 0) -> CycleCache:
    """
    Factory function to get a cycle cache instance.

    Args:
        cache_type: Type of cache to use ('memory', 'disk')
        cache_path: Path to the SQLite file (for disk cache)
        ttl: Time-to-live for cache entries in seconds (0 never expires)

    Returns:
        CycleCache: Cache instance

    Raises:
        ValueError: If cache_type is invalid or if cache_path is not provided for disk cache
    """
    if cache_type == "memory":
        return MemoryCycleCache(ttl=ttl)
    elif cache_type == "disk":
        if cache_path is None:
            raise ValueError("cache_path must be provided for disk cache")
        return DiskCycleCache(cache_path=cache_path, ttl=ttl)
    else:
        raise ValueError(f"Unsupported cache type: {cache_type}")
