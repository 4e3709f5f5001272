"""
Cache utilities for lattice-point counts.
"""
import logging
from functools import wraps

from django.core.cache import caches

logger = logging.getLogger(__name__)

COUNTS_CACHE = 'counts'


def count_key(system_hash, N, key_prefix='count'):
    return f"{key_prefix}:{system_hash}:{N}"


def index_key(system_hash, key_prefix='count'):
    return f"{key_prefix}:{system_hash}:index"


def cached_count(system, N, compute, timeout=None, key_prefix='count'):
    """
    Return the count of system at N from the counts cache, computing it on a miss.

    Args:
        system: FormSystem; its content hash is part of the key, so any change
            to the basis misses
        N: Dilation
        compute: Zero-argument callable producing the exact count
        timeout: Cache timeout in seconds. If None, the entry never expires.
    """
    cache = caches[COUNTS_CACHE]
    system_hash = system.content_hash()
    key = count_key(system_hash, N, key_prefix)
    cached = cache.get(key)
    if cached is not None:
        logger.debug(f"Cache hit for {key}")
        return int(cached)

    logger.debug(f"Cache miss for {key}")
    value = int(compute())
    cache.set(key, value, timeout)
    # Remember which dilations are stored so they can be cleared per system
    stored = cache.get(index_key(system_hash, key_prefix)) or []
    if N not in stored:
        cache.set(index_key(system_hash, key_prefix), sorted(stored + [N]), timeout)
    return value


def cache_counts(key_prefix='count'):
    """
    Cache a function of (system, N, ...) returning an integer count.

    Extra arguments (such as the job count) do not change the result and are
    not part of the key.
    """
    def decorator(count_func):
        @wraps(count_func)
        def _wrapped(system, N, *args, **kwargs):
            return cached_count(system, N, lambda: count_func(system, N, *args, **kwargs), key_prefix=key_prefix)
        return _wrapped
    return decorator


def clear_count_cache(system=None, key_prefix='count'):
    """
    Clear cached counts.

    Without a system the whole counts cache is cleared; with one, only the
    dilations recorded in its index are removed.
    """
    cache = caches[COUNTS_CACHE]
    if system is None:
        cache.clear()
        logger.info("Count cache cleared")
        return

    system_hash = system.content_hash()
    stored = cache.get(index_key(system_hash, key_prefix)) or []
    cache.delete_many([count_key(system_hash, N, key_prefix) for N in stored] + [index_key(system_hash, key_prefix)])
    logger.info(f"Cleared {len(stored)} cached counts for system {system_hash[:12]}")
