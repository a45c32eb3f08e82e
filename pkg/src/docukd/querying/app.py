"""Querying parent: bundles, caches, and aggregates the search paths.

Delegates synchronously to searching and nliprocessing via the registry.
A failing sub-service only takes down its own query family.
"""

from __future__ import annotations

from typing import Any, Dict, Optional

import requests
from fastapi import FastAPI
from pydantic import BaseModel

from ..clients import RegistryClient, raise_for_error
from ..errors import (
    DocukdError,
    NliUnavailable,
    SearchingUnavailable,
    ValidationError,
)
from ..httpapi import create_base_app
from ..model import QueryResult, relevance_sorted
from .cache import QueryCache

MAX_QUESTION_BYTES = 1024


class QueryingService:
    def __init__(self, registry: RegistryClient, cache: QueryCache) -> None:
        self.registry = registry
        self.cache = cache
        self._session = requests.Session()

    # ------------------------------------------------------------------
    # upstream plumbing

    def _call(self, service: str, unavailable: type, method: str, path: str,
              **kwargs: Any) -> Dict[str, Any]:
        try:
            address = self.registry.resolve_address(service)
            resp = self._session.request(method, address + path, timeout=10.0, **kwargs)
        except (requests.RequestException, DocukdError) as exc:
            if isinstance(exc, DocukdError) and not exc.code == "NoHealthyInstance":
                raise
            raise unavailable(f"{service} is unavailable: {exc}") from exc
        raise_for_error(resp)
        return resp.json()

    def _searching(self, method: str, path: str, **kwargs: Any) -> Dict[str, Any]:
        return self._call("searching", SearchingUnavailable, method, path, **kwargs)

    def _nli(self, method: str, path: str, **kwargs: Any) -> Dict[str, Any]:
        return self._call("nliprocessing", NliUnavailable, method, path, **kwargs)

    # ------------------------------------------------------------------
    # query operations

    def documents_by_keyword(self, keyword: str, limit: int) -> Dict[str, Any]:
        if not keyword or not keyword.strip():
            raise ValidationError("keyword must be non-empty")
        key = f"keyword|{keyword.strip().lower()}|{limit}"
        return self.cache.get_or_compute(key, lambda: self._searching(
            "GET", "/internal/searching/keyword",
            params={"keyword": keyword, "limit": limit},
        ))

    def similar_documents(self, doc_id: str, limit: int) -> Dict[str, Any]:
        key = f"similar|{doc_id.strip().lower()}|{limit}"
        return self.cache.get_or_compute(key, lambda: self._searching(
            "GET", f"/internal/searching/similar/{doc_id}", params={"limit": limit},
        ))

    def keywords_of(self, doc_id: str) -> Dict[str, Any]:
        key = f"keywords|{doc_id.strip().lower()}"
        return self.cache.get_or_compute(key, lambda: self._searching(
            "GET", f"/internal/searching/keywords/{doc_id}",
        ))

    def nl_answer(self, question: str) -> Dict[str, Any]:
        if not question or not question.strip():
            raise ValidationError("question must be non-empty")
        if len(question.encode("utf-8")) > MAX_QUESTION_BYTES:
            raise ValidationError("question exceeds 1 KiB")
        # free text: unbounded key space, deliberately not cached
        return self._nli("POST", "/internal/nli/answer", json={"question": question})

    def aggregate(self, keyword: str, doc_id: Optional[str], limit: int) -> Dict[str, Any]:
        keyword_hits = QueryResult.from_dict(self.documents_by_keyword(keyword, limit))
        merged: Dict[str, tuple] = {}
        for row in keyword_hits.rows:
            merged[row[0]] = row
        if doc_id:
            similar = QueryResult.from_dict(self.similar_documents(doc_id, limit))
            for row in similar.rows:
                existing = merged.get(row[0])
                if existing is None or row[2] > existing[2]:
                    merged[row[0]] = row
        rows = relevance_sorted(list(merged.values()), score_col=2, id_col=0)[:limit]
        return QueryResult(
            query_kind="Aggregate",
            columns=("doc_id", "filename", "score"),
            rows=tuple(rows),
            data_version=keyword_hits.data_version,
        ).to_dict()


class NlQuestion(BaseModel):
    question: str


def create_app(service: QueryingService) -> FastAPI:
    app = create_base_app("querying")
    app.state.service = service

    @app.get("/query/documents")
    def by_keyword(keyword: str = "", limit: int = 20):
        return service.documents_by_keyword(keyword, limit)

    @app.get("/query/documents/{doc_id}/similar")
    def similar(doc_id: str, limit: int = 20):
        return service.similar_documents(doc_id, limit)

    @app.get("/query/documents/{doc_id}/keywords")
    def keywords(doc_id: str):
        return service.keywords_of(doc_id)

    @app.post("/query/nli")
    def nli(body: NlQuestion):
        return service.nl_answer(body.question)

    @app.get("/query/aggregate")
    def aggregate(keyword: str = "", doc_id: str = "", limit: int = 20):
        if not keyword.strip():
            raise ValidationError("aggregate requires at least a keyword")
        return service.aggregate(keyword, doc_id or None, limit)

    return app
