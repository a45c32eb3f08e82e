"""TTL query cache with single-flight computation per key.

Entries are served only while fresh; expired entries are never used as a
fallback. The cache is persisted best-effort so a restart starts warm.
"""

from __future__ import annotations

import threading
import time
from typing import Any, Callable, Dict, Optional, Tuple

from ..store import DocStore

DEFAULT_TTL = 30.0
CACHE = "cache"


class QueryCache:
    def __init__(self, store: Optional[DocStore] = None, ttl: float = DEFAULT_TTL,
                 clock: Callable[[], float] = time.monotonic) -> None:
        self.store = store
        self.ttl = ttl
        self._clock = clock
        self._guard = threading.Lock()
        self._entries: Dict[str, Tuple[float, Any]] = {}
        self._key_locks: Dict[str, threading.Lock] = {}
        if store is not None:
            # warm start: stored entries restart their ttl window
            now = self._clock()
            for key, value in store.items(CACHE):
                self._entries[key] = (now + ttl, value)

    def _lock_for(self, key: str) -> threading.Lock:
        with self._guard:
            lock = self._key_locks.get(key)
            if lock is None:
                lock = self._key_locks[key] = threading.Lock()
            return lock

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        with self._guard:
            hit = self._entries.get(key)
            if hit and hit[0] > self._clock():
                return hit[1]
        with self._lock_for(key):
            with self._guard:
                hit = self._entries.get(key)
                if hit and hit[0] > self._clock():
                    return hit[1]
            value = compute()
            with self._guard:
                self._entries[key] = (self._clock() + self.ttl, value)
            if self.store is not None:
                self.store.put(CACHE, key, value)
            return value

    def invalidate_all(self) -> None:
        with self._guard:
            self._entries.clear()
