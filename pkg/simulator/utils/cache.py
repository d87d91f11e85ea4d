"""
In-process Caching Module for the QEC Simulator

Memoises quadrature values of the one-sided kernel h(tau), so repeated
evaluations inside one run (every history of an enumeration, every
separation of a correlation scan) reuse them. Entries are read-only once
stored; the oldest entries are evicted beyond MAX_ENTRIES.
"""

import json
import hashlib
import logging
from typing import Any, Callable, Dict, Optional

import numpy as np

logger = logging.getLogger(__name__)

_STORE: Dict[str, Any] = {}
_STATS = {"hits": 0, "misses": 0, "evictions": 0}

# Entries above this many stored numbers are not kept
MAX_ENTRY_SIZE = 1 << 22
MAX_ENTRIES = 200_000


def _default(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "dict"):
        return value.dict()
    raise TypeError(f"Cannot build a cache key from {type(value).__name__}")


def generate_cache_key(prefix: str, params: Dict[str, Any]) -> str:
    """
    Generate a unique cache key based on call parameters

    Args:
        prefix: Prefix for the cache key
        params: Dictionary of parameters to include in the key

    Returns:
        Unique cache key string
    """
    param_str = json.dumps(params, sort_keys=True, default=_default)
    params_hash = hashlib.md5(param_str.encode()).hexdigest()
    return f"qecsim:{prefix}:{params_hash}"


def get_cached_result(key: str) -> Optional[Any]:
    value = _STORE.get(key)
    if value is None:
        _STATS["misses"] += 1
    else:
        _STATS["hits"] += 1
    return value


def set_cached_result(key: str, data: Any) -> bool:
    size = data.size if isinstance(data, np.ndarray) else 1
    if size > MAX_ENTRY_SIZE:
        logger.debug(f"Not caching {key}: {size} entries")
        return False
    if isinstance(data, np.ndarray):
        data.setflags(write=False)
    while len(_STORE) >= MAX_ENTRIES:
        del _STORE[next(iter(_STORE))]
        _STATS["evictions"] += 1
    _STORE[key] = data
    return True


def cached_call(func: Callable[[], Any], prefix: str, params: Dict[str, Any]) -> Any:
    """
    Return the cached value for (prefix, params), computing it with func() on a miss.
    """
    key = generate_cache_key(prefix, params)
    cached = get_cached_result(key)
    if cached is not None:
        return cached
    result = func()
    set_cached_result(key, result)
    return result


def clear_cache(prefix: Optional[str] = None) -> int:
    """
    Clear cache entries

    Args:
        prefix: Optional prefix to clear only specific keys

    Returns:
        Number of keys cleared
    """
    pattern = "qecsim:" if prefix is None else f"qecsim:{prefix}:"
    keys = [key for key in _STORE if key.startswith(pattern)]
    for key in keys:
        del _STORE[key]
    return len(keys)


def cache_stats() -> Dict[str, int]:
    return {"entries": len(_STORE), **_STATS}
