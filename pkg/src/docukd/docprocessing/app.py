"""Public HTTP surface of document processing (reached via the gateway)."""

from __future__ import annotations

import base64
from typing import Optional

from fastapi import FastAPI, Request, UploadFile

from ..errors import EmptyDocument, ValidationError
from ..httpapi import create_base_app
from .orchestrator import Orchestrator


def create_app(orchestrator: Orchestrator) -> FastAPI:
    app = create_base_app("docprocessing")
    app.state.orchestrator = orchestrator

    @app.post("/documents", status_code=201)
    async def upload(request: Request):
        content_type = (request.headers.get("content-type") or "").lower()
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload_file = form.get("file")
            if not isinstance(upload_file, UploadFile):
                raise ValidationError("multipart upload requires a 'file' part")
            content = await upload_file.read()
            filename = upload_file.filename or "unnamed"
            media_type = str(form.get("media_type") or upload_file.content_type or "")
        else:
            body = await request.json()
            try:
                content = base64.b64decode(body["content_base64"])
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"bad JSON upload: {exc}") from exc
            filename = body.get("filename", "unnamed")
            media_type = body.get("media_type", "")
        doc_id = orchestrator.upload_document(filename, media_type, content)
        return {"doc_id": doc_id, "status": orchestrator.get_status(doc_id).to_dict()}

    @app.get("/documents")
    def list_documents(offset: int = 0, limit: int = 50):
        return {"documents": orchestrator.list_documents(offset=offset, limit=limit)}

    @app.get("/documents/{doc_id}/status")
    def get_status(doc_id: str):
        return orchestrator.get_status(doc_id).to_dict()

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        record = orchestrator.get_record(doc_id)
        return {
            "doc_id": record.doc_id,
            "filename": record.filename,
            "media_type": record.media_type,
            "uploaded_at": record.uploaded_at,
            "status": record.status.to_dict(),
        }

    @app.post("/documents/{doc_id}/retry")
    def retry(doc_id: str):
        return orchestrator.retry_failed(doc_id).to_dict()

    return app
