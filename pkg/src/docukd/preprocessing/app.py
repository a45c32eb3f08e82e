"""Internal HTTP surface of preprocessing: the synchronous replay interface."""

from __future__ import annotations

from fastapi import FastAPI

from ..httpapi import create_base_app
from .service import PreprocessingService


def create_app(service: PreprocessingService) -> FastAPI:
    app = create_base_app("preprocessing")
    app.state.service = service

    @app.get("/internal/preprocessing/results/{doc_id}")
    def replay_result(doc_id: str):
        return service.replay_result(doc_id).to_dict()

    return app
