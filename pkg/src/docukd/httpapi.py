"""Shared HTTP plumbing: app factory and error rendering."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import DocukdError


def create_base_app(title: str) -> FastAPI:
    app = FastAPI(title=title, docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(DocukdError)
    async def handle_docukd_error(request: Request, exc: DocukdError) -> JSONResponse:
        return JSONResponse(status_code=exc.http_status, content=exc.to_dict())

    @app.get("/health")
    def health():
        return {"status": "ok", "service": title}

    return app
