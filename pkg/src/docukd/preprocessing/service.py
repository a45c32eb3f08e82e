"""Preprocessing worker: documents in, machine-readable text out."""

from __future__ import annotations

from typing import Any, Dict, Optional

from ..clients import BusClient
from ..errors import NoPriorResult
from ..model import DocumentRecord, ExtractedText, PipelineStepRequest, Step
from ..store import DocStore
from ..worker import StepWorker
from .extract import ExtractorRegistry, default_registry

EXTRACTIONS = "extractions"


class PreprocessingService(StepWorker):
    step = Step.PREPROCESS
    reply_queue = "q.preprocessing.res"

    def __init__(self, store: DocStore, bus: Optional[BusClient] = None,
                 extractors: Optional[ExtractorRegistry] = None) -> None:
        super().__init__(bus)
        self.store = store
        self.extractors = extractors or default_registry()

    def extract_text(self, record: DocumentRecord) -> ExtractedText:
        stored = self.store.get(EXTRACTIONS, record.doc_id)
        if stored is not None:
            return ExtractedText.from_dict(stored)
        result = self.extractors.extract(record)
        self.store.put(EXTRACTIONS, record.doc_id, result.to_dict())
        return result

    def replay_result(self, doc_id: str) -> ExtractedText:
        stored = self.store.get(EXTRACTIONS, doc_id)
        if stored is None:
            raise NoPriorResult(f"no extraction stored for {doc_id}")
        return ExtractedText.from_dict(stored)

    def process(self, request: PipelineStepRequest) -> Dict[str, Any]:
        record = DocumentRecord.from_dict(request.input_payload)
        return self.extract_text(record).to_dict()
