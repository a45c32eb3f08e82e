"""Internal HTTP surface of similarity computation."""

from __future__ import annotations

from fastapi import FastAPI

from ..httpapi import create_base_app
from .service import SimComputationService
from .vectors import MATH_CALLS


def create_app(service: SimComputationService) -> FastAPI:
    app = create_base_app("simcomputation")
    app.state.service = service

    @app.get("/internal/simcomputation/results/{doc_id}")
    def replay_result(doc_id: str):
        return {"similarities": [r.to_dict() for r in service.replay_result(doc_id)]}

    @app.get("/internal/simcomputation/similar/{doc_id}")
    def similar(doc_id: str, limit: int = 20):
        return {
            "doc_id": doc_id,
            "similar": [
                {"doc_id": other, "score": score}
                for other, score in service.top_similar(doc_id, limit)
            ],
        }

    @app.get("/internal/simcomputation/mathcalls")
    def mathcalls():
        return dict(MATH_CALLS)

    return app
