"""SQLite-backed relational store for the NL query service.

The schema is deliberately small so every supported question translates to
the SQL subset: documents, per-document keywords, canonical similarity pairs.
"""

from __future__ import annotations

import sqlite3
import threading
from typing import List, Optional, Tuple

from ..errors import UnknownDocument
from ..model import CompletionNotice, QueryResult
from .translate import SqlPlan

_SCHEMA = """
CREATE TABLE IF NOT EXISTS documents (
    doc_id TEXT PRIMARY KEY,
    filename TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS keywords (
    doc_id TEXT NOT NULL,
    term TEXT NOT NULL,
    score REAL NOT NULL,
    PRIMARY KEY (doc_id, term)
);
CREATE TABLE IF NOT EXISTS similarities (
    doc_a TEXT NOT NULL,
    doc_b TEXT NOT NULL,
    score REAL NOT NULL,
    PRIMARY KEY (doc_a, doc_b),
    CHECK (doc_a < doc_b)
);
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value INTEGER NOT NULL
);
"""


class RelationalStore:
    def __init__(self, path: str) -> None:
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._lock = threading.RLock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    # ------------------------------------------------------------------
    # ingest

    def ingest(self, notice: CompletionNotice) -> bool:
        with self._lock, self._conn:
            known = self._conn.execute(
                "SELECT 1 FROM documents WHERE doc_id = ?", (notice.doc_id,)
            ).fetchone()
            if known:
                return False
            self._conn.execute(
                "INSERT INTO documents (doc_id, filename) VALUES (?, ?)",
                (notice.doc_id, notice.filename),
            )
            self._conn.executemany(
                "INSERT OR REPLACE INTO keywords (doc_id, term, score) VALUES (?, ?, ?)",
                [(notice.doc_id, k.term, k.score) for k in notice.keywords.keywords],
            )
            self._conn.executemany(
                "INSERT OR REPLACE INTO similarities (doc_a, doc_b, score) VALUES (?, ?, ?)",
                [(r.doc_a, r.doc_b, r.score) for r in notice.similarities],
            )
            self._conn.execute(
                "INSERT INTO meta (key, value) VALUES ('data_version', 1) "
                "ON CONFLICT(key) DO UPDATE SET value = value + 1"
            )
            return True

    def data_version(self) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT value FROM meta WHERE key = 'data_version'"
            ).fetchone()
            return row[0] if row else 0

    def has_document(self, doc_id: str) -> bool:
        with self._lock:
            return bool(self._conn.execute(
                "SELECT 1 FROM documents WHERE doc_id = ?", (doc_id,)
            ).fetchone())

    def filename_of(self, doc_id: str) -> Optional[str]:
        with self._lock:
            row = self._conn.execute(
                "SELECT filename FROM documents WHERE doc_id = ?", (doc_id,)
            ).fetchone()
            return row[0] if row else None

    # ------------------------------------------------------------------
    # plan execution

    def execute_plan(self, plan: SqlPlan, query_kind: str) -> QueryResult:
        with self._lock:
            raw: List[Tuple] = self._conn.execute(plan.sql, plan.params).fetchall()
        if plan.resolve_neighbor is not None:
            me = plan.resolve_neighbor
            rows = []
            for doc_a, doc_b, score in raw:
                other = doc_b if doc_a == me else doc_a
                rows.append((other, self.filename_of(other), score))
            rows.sort(key=lambda r: (-r[2], r[0]))
        else:
            rows = [tuple(r) for r in raw]
        return QueryResult(
            query_kind=query_kind,
            columns=plan.columns,
            rows=tuple(rows[: plan.limit]),
            data_version=self.data_version(),
        )
