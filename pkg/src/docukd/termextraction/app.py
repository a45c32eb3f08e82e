"""Internal HTTP surface of term extraction: replay and reindex."""

from __future__ import annotations

from fastapi import FastAPI

from ..httpapi import create_base_app
from .service import TermExtractionService


def create_app(service: TermExtractionService) -> FastAPI:
    app = create_base_app("termextraction")
    app.state.service = service

    @app.get("/internal/termextraction/results/{doc_id}")
    def replay_result(doc_id: str):
        return service.replay_result(doc_id).to_dict()

    @app.post("/internal/termextraction/reindex")
    def reindex():
        return {"reindexed": service.reindex()}

    return app
