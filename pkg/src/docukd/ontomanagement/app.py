"""Public HTTP surface of ontology management (reached via the gateway)."""

from __future__ import annotations

from typing import Any, Dict

from fastapi import FastAPI
from fastapi.responses import PlainTextResponse

from ..httpapi import create_base_app
from .service import OntoManagementService


def create_app(service: OntoManagementService) -> FastAPI:
    app = create_base_app("ontomanagement")
    app.state.service = service

    @app.get("/ontomanagement/getVisualisation")
    def get_visualisation():
        return service.get_visualisation()

    @app.get("/ontomanagement/ontology")
    def get_ontology(format: str = "json"):
        body = service.get_ontology(format)
        if format == "turtle":
            return PlainTextResponse(body, media_type="text/turtle")
        return body

    @app.post("/ontomanagement/edit")
    def edit(command: Dict[str, Any]):
        return service.edit(command).to_dict()

    return app
