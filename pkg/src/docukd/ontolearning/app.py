"""Ontology learning exposes no public interfaces; the app only serves the
health probe used by the harness and the registry readiness check."""

from __future__ import annotations

from fastapi import FastAPI

from ..httpapi import create_base_app
from .pipeline import OntolearnService


def create_app(service: OntolearnService) -> FastAPI:
    app = create_base_app("ontolearning")
    app.state.service = service
    return app
