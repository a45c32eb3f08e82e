"""Internal HTTP surface of searching (reached only by the querying parent)."""

from __future__ import annotations

from fastapi import FastAPI

from ..httpapi import create_base_app
from ..model import CompletionNotice
from ..msgbus.broker import MessageEnvelope
from .index import SearchIndex


def create_app(index: SearchIndex) -> FastAPI:
    app = create_base_app("searching")
    app.state.index = index

    @app.get("/internal/searching/keyword")
    def by_keyword(keyword: str = "", limit: int = 20):
        return index.search_by_keyword(keyword, limit).to_dict()

    @app.get("/internal/searching/similar/{doc_id}")
    def similar(doc_id: str, limit: int = 20):
        return index.similar_documents(doc_id, limit).to_dict()

    @app.get("/internal/searching/keywords/{doc_id}")
    def keywords(doc_id: str):
        return index.keywords_of(doc_id).to_dict()

    @app.get("/internal/searching/version")
    def version():
        return {"data_version": index.data_version()}

    return app


def make_ingest_handler(index: SearchIndex):
    def handle(envelope: MessageEnvelope) -> None:
        # malformed payloads raise, get nacked, and end up dead-lettered
        index.ingest(CompletionNotice.from_dict(envelope.payload))
    return handle
