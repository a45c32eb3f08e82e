"""Denormalized search store: keyword postings and similarity pairs.

Fed exclusively by completion notices; the read path is lookup + sort, never
computation. Ingest is idempotent by doc_id and bumps data_version exactly
once per document.
"""

from __future__ import annotations

import threading
from typing import Any, Dict, List, Optional, Tuple

from ..errors import UnknownDocument, ValidationError
from ..model import CompletionNotice, QueryResult
from ..store import DocStore

DOCUMENTS = "documents"
POSTINGS = "postings"
KEYWORDS = "keywords"
PAIRS = "pairs"
META = "meta"

KEYWORD_COLUMNS = ("doc_id", "filename", "score")
LISTING_COLUMNS = ("term", "score")


def normalize_term(term: str) -> str:
    return term.strip().lower()


class SearchIndex:
    def __init__(self, store: DocStore) -> None:
        self.store = store
        self._write_lock = threading.Lock()

    # ------------------------------------------------------------------
    # ingest

    def ingest(self, notice: CompletionNotice) -> bool:
        with self._write_lock:
            if self.store.contains(DOCUMENTS, notice.doc_id):
                return False
            self.store.put(DOCUMENTS, notice.doc_id, {"filename": notice.filename})
            self.store.put(
                KEYWORDS, notice.doc_id,
                [[k.term, k.score] for k in notice.keywords.keywords],
            )
            for keyword in notice.keywords.keywords:
                term = normalize_term(keyword.term)
                posting: List[List] = self.store.get(POSTINGS, term, default=[])
                posting = [p for p in posting if p[0] != notice.doc_id]
                posting.append([notice.doc_id, keyword.score])
                self.store.put(POSTINGS, term, posting)
            for record in notice.similarities:
                key = f"{record.doc_a}|{record.doc_b}"
                self.store.put(PAIRS, key, {
                    "doc_a": record.doc_a, "doc_b": record.doc_b, "score": record.score,
                })
            self.store.update(META, "data_version", lambda v: (v or 0) + 1, default=0)
            return True

    # ------------------------------------------------------------------
    # reads

    def data_version(self) -> int:
        return self.store.get(META, "data_version", default=0)

    def _filename(self, doc_id: str) -> Optional[str]:
        doc = self.store.get(DOCUMENTS, doc_id)
        return doc["filename"] if doc else None

    def search_by_keyword(self, keyword: str, limit: int) -> QueryResult:
        if not keyword or not keyword.strip():
            raise ValidationError("keyword must be non-empty")
        posting = self.store.get(POSTINGS, normalize_term(keyword), default=[])
        rows = [(doc_id, self._filename(doc_id), score) for doc_id, score in posting]
        rows.sort(key=lambda r: (-r[2], r[0]))
        return QueryResult(
            query_kind="KeywordSearch",
            columns=KEYWORD_COLUMNS,
            rows=tuple(rows[:limit]),
            data_version=self.data_version(),
        )

    def similar_documents(self, doc_id: str, limit: int) -> QueryResult:
        if not self.store.contains(DOCUMENTS, doc_id):
            raise UnknownDocument(f"document {doc_id} is not ingested")
        rows = []
        for _, pair in self.store.items(PAIRS):
            other = None
            if pair["doc_a"] == doc_id:
                other = pair["doc_b"]
            elif pair["doc_b"] == doc_id:
                other = pair["doc_a"]
            if other is not None:
                rows.append((other, self._filename(other), pair["score"]))
        rows.sort(key=lambda r: (-r[2], r[0]))
        return QueryResult(
            query_kind="SimilarDocuments",
            columns=KEYWORD_COLUMNS,
            rows=tuple(rows[:limit]),
            data_version=self.data_version(),
        )

    def keywords_of(self, doc_id: str) -> QueryResult:
        if not self.store.contains(DOCUMENTS, doc_id):
            raise UnknownDocument(f"document {doc_id} is not ingested")
        stored = self.store.get(KEYWORDS, doc_id, default=[])
        return QueryResult(
            query_kind="ListKeywords",
            columns=LISTING_COLUMNS,
            rows=tuple((term, score) for term, score in stored),
            data_version=self.data_version(),
        )
