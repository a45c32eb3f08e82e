"""Embedded document store: one JSON file per collection.

Each service owns a private store directory. Writes are atomic (tempfile +
rename) so a killed process never leaves a half-written collection behind;
restarts simply reload the files.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple


class DocStore:
    """Thread-safe map of collection name -> {key: JSON document}."""

    def __init__(self, directory: str) -> None:
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self._lock = threading.RLock()
        self._collections: Dict[str, Dict[str, Any]] = {}
        self._load_all()

    def _path(self, collection: str) -> str:
        return os.path.join(self.directory, f"{collection}.json")

    def _load_all(self) -> None:
        for name in os.listdir(self.directory):
            if name.endswith(".json"):
                with open(os.path.join(self.directory, name), "r", encoding="utf-8") as fh:
                    self._collections[name[: -len(".json")]] = json.load(fh)

    def _flush(self, collection: str) -> None:
        data = self._collections.get(collection, {})
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(data, fh)
            os.replace(tmp, self._path(collection))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def put(self, collection: str, key: str, doc: Any) -> None:
        with self._lock:
            self._collections.setdefault(collection, {})[key] = doc
            self._flush(collection)

    def put_many(self, collection: str, docs: Dict[str, Any]) -> None:
        with self._lock:
            self._collections.setdefault(collection, {}).update(docs)
            self._flush(collection)

    def get(self, collection: str, key: str, default: Any = None) -> Any:
        with self._lock:
            return self._collections.get(collection, {}).get(key, default)

    def contains(self, collection: str, key: str) -> bool:
        with self._lock:
            return key in self._collections.get(collection, {})

    def delete(self, collection: str, key: str) -> bool:
        with self._lock:
            coll = self._collections.get(collection, {})
            if key not in coll:
                return False
            del coll[key]
            self._flush(collection)
            return True

    def keys(self, collection: str) -> List[str]:
        with self._lock:
            return list(self._collections.get(collection, {}).keys())

    def items(self, collection: str) -> List[Tuple[str, Any]]:
        with self._lock:
            return list(self._collections.get(collection, {}).items())

    def count(self, collection: str) -> int:
        with self._lock:
            return len(self._collections.get(collection, {}))

    def update(self, collection: str, key: str, fn: Callable[[Any], Any], default: Any = None) -> Any:
        """Atomically read-modify-write one document."""
        with self._lock:
            coll = self._collections.setdefault(collection, {})
            doc = fn(coll.get(key, default))
            coll[key] = doc
            self._flush(collection)
            return doc
