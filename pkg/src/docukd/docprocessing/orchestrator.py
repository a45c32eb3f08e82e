"""Pipeline orchestrator: accepts uploads, drives the three worker steps
through request/reply queues, tracks status, and fans completed documents
out to the query stores and ontology learning.

The orchestrator never computes keywords or similarities itself; it owns
status, routing, and the final aggregates. Effects are exactly-once per
document despite at-least-once delivery: replies are deduplicated by
(doc_id, step, payload hash) and by the status state machine.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from typing import Any, Dict, List, Optional

import requests

from ..clients import BusClient, RegistryClient
from ..errors import (
    DocukdError,
    DocumentTooLarge,
    EmptyDocument,
    NoPriorResult,
    NotFailed,
    StorageFailure,
    UnknownDocument,
    UnsupportedMediaType,
)
from ..model import (
    DONE_STATE,
    IN_PROGRESS_STATE,
    STEP_ORDER,
    CompletionNotice,
    DocState,
    DocumentRecord,
    DocumentStatus,
    ExtractedText,
    PipelineStepRequest,
    SimilarityRecord,
    Step,
    StepReply,
    TermExtractionResult,
    new_document_id,
    utc_now,
    validate_status_transition,
)
from ..msgbus.broker import MessageEnvelope
from ..store import DocStore

log = logging.getLogger("docukd.docprocessing")

DOCUMENTS = "documents"
STEP_OUTPUTS = "step_outputs"
PROCESSED_REPLIES = "processed_replies"
NOTIFIED = "notified"

ACCEPTED_MEDIA_TYPES = frozenset({"text/plain", "application/pdf"})
MAX_CONTENT_BYTES = 50 * 1024 * 1024
DEFAULT_MAX_STEP_ATTEMPTS = 3

REQUEST_QUEUES = {
    Step.PREPROCESS: "q.preprocessing.req",
    Step.TERM_EXTRACT: "q.termextraction.req",
    Step.SIM_COMPUTE: "q.simcomputation.req",
}

REPLAY_ROUTES = {
    Step.PREPROCESS: ("preprocessing", "/internal/preprocessing/results/{doc_id}"),
    Step.TERM_EXTRACT: ("termextraction", "/internal/termextraction/results/{doc_id}"),
    Step.SIM_COMPUTE: ("simcomputation", "/internal/simcomputation/results/{doc_id}"),
}

INGEST_QUEUES = ("q.searching.ingest", "q.nli.ingest")
ONTOLEARN_QUEUE = "q.ontolearn.ingest"


def _next_step(step: Step) -> Optional[Step]:
    idx = STEP_ORDER.index(step)
    return STEP_ORDER[idx + 1] if idx + 1 < len(STEP_ORDER) else None


class Orchestrator:
    def __init__(
        self,
        store: DocStore,
        bus: BusClient,
        registry: Optional[RegistryClient] = None,
        max_step_attempts: int = DEFAULT_MAX_STEP_ATTEMPTS,
    ) -> None:
        self.store = store
        self.bus = bus
        self.registry = registry
        self.max_step_attempts = max_step_attempts
        self._locks_guard = threading.Lock()
        self._locks: Dict[str, threading.Lock] = {}

    def _lock_for(self, doc_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(doc_id)
            if lock is None:
                lock = self._locks[doc_id] = threading.Lock()
            return lock

    # ------------------------------------------------------------------
    # public surface

    def upload_document(self, filename: str, media_type: str, content: bytes) -> str:
        media_type = media_type.split(";")[0].strip().lower()
        if media_type not in ACCEPTED_MEDIA_TYPES:
            raise UnsupportedMediaType(f"media type {media_type!r} is not accepted")
        if not content:
            raise EmptyDocument("uploaded document is empty")
        if len(content) > MAX_CONTENT_BYTES:
            raise DocumentTooLarge(f"document exceeds {MAX_CONTENT_BYTES} bytes")

        record = DocumentRecord(
            doc_id=new_document_id(),
            filename=filename or "unnamed",
            media_type=media_type,
            content=content,
            uploaded_at=utc_now(),
            status=DocumentStatus(state=DocState.RECEIVED),
        )
        self.store.put(DOCUMENTS, record.doc_id, record.to_dict())
        with self._lock_for(record.doc_id):
            self._publish_step(record.doc_id, Step.PREPROCESS, bump_attempts=True)
        return record.doc_id

    def get_record(self, doc_id: str) -> DocumentRecord:
        stored = self.store.get(DOCUMENTS, doc_id)
        if stored is None:
            raise UnknownDocument(f"unknown document {doc_id}")
        return DocumentRecord.from_dict(stored)

    def get_status(self, doc_id: str) -> DocumentStatus:
        return self.get_record(doc_id).status

    def list_documents(self, offset: int = 0, limit: int = 50) -> List[Dict[str, Any]]:
        metas = []
        for doc_id, raw in self.store.items(DOCUMENTS):
            metas.append({
                "doc_id": doc_id,
                "filename": raw["filename"],
                "media_type": raw["media_type"],
                "uploaded_at": raw["uploaded_at"],
                "status": raw["status"],
            })
        metas.sort(key=lambda m: (m["uploaded_at"], m["doc_id"]))
        return metas[offset:offset + limit]

    def retry_failed(self, doc_id: str) -> DocumentStatus:
        with self._lock_for(doc_id):
            record = self.get_record(doc_id)
            status = record.status
            if status.state is not DocState.FAILED:
                raise NotFailed(f"document {doc_id} is {status.state.value}, not Failed")
            step = status.failed_step
            if status.attempts.get(step.value, 0) >= self.max_step_attempts:
                return self._set_status(
                    doc_id,
                    DocumentStatus(
                        state=DocState.FAILED, failed_step=step,
                        reason="retry limit", attempts=status.attempts,
                    ),
                    force=True,
                )
            self._publish_step(doc_id, step, bump_attempts=True)
            return self.get_status(doc_id)

    # ------------------------------------------------------------------
    # reply handling (bus consumer)

    def handle_reply(self, envelope: MessageEnvelope) -> None:
        reply = StepReply.from_dict(envelope.payload)
        self.advance_on_reply(reply)

    def advance_on_reply(self, reply: StepReply) -> str:
        """Apply one worker reply; returns the action taken (for observability)."""
        with self._lock_for(reply.doc_id):
            stored = self.store.get(DOCUMENTS, reply.doc_id)
            if stored is None:
                log.warning("stale reply for unknown document %s", reply.doc_id)
                return "stale"
            status = DocumentStatus.from_dict(stored["status"])

            attempt = status.attempts.get(reply.step.value, 0)
            dedup_key = self._dedup_key(reply, attempt)
            if self.store.contains(PROCESSED_REPLIES, dedup_key):
                log.info("duplicate %s reply for %s ignored", reply.step.value, reply.doc_id)
                return "duplicate"
            if status.state is not IN_PROGRESS_STATE[reply.step]:
                log.info(
                    "stale %s reply for %s in state %s ignored",
                    reply.step.value, reply.doc_id, status.state.value,
                )
                return "stale"

            if not reply.ok:
                self._set_status(reply.doc_id, DocumentStatus(
                    state=DocState.FAILED, failed_step=reply.step,
                    reason=reply.error or "worker error", attempts=status.attempts,
                ))
                self.store.put(PROCESSED_REPLIES, dedup_key, True)
                return "failed"

            outputs = self.store.get(STEP_OUTPUTS, reply.doc_id, default={})
            outputs[reply.step.value] = reply.output
            self.store.put(STEP_OUTPUTS, reply.doc_id, outputs)

            following = _next_step(reply.step)
            if following is None:
                self._publish_completion(reply.doc_id)
                self._set_status(reply.doc_id, DocumentStatus(
                    state=DocState.COMPLETED, attempts=status.attempts,
                ))
                action = "completed"
            else:
                self._publish_step(reply.doc_id, following, bump_attempts=True,
                                   via_done_state=DONE_STATE[reply.step])
                action = "advanced"
            self.store.put(PROCESSED_REPLIES, dedup_key, True)
            return action

    @staticmethod
    def _dedup_key(reply: StepReply, attempt: int) -> str:
        # scoped by attempt: a redelivered duplicate of one attempt is
        # suppressed, while a retried step's identical reply still applies
        digest = hashlib.sha256(
            json.dumps(reply.to_dict(), sort_keys=True).encode("utf-8")
        ).hexdigest()[:16]
        return f"{reply.doc_id}|{reply.step.value}|{attempt}|{digest}"

    # ------------------------------------------------------------------
    # error recovery

    def recover_step(self, doc_id: str, step: Step) -> Dict[str, Any]:
        """Fetch a worker's persisted result synchronously and replay it."""
        if self.registry is None:
            raise NoPriorResult("no registry client configured")
        service, path = REPLAY_ROUTES[step]
        try:
            address = self.registry.resolve_address(service)
            resp = requests.get(address + path.format(doc_id=doc_id), timeout=10.0)
        except (DocukdError, requests.RequestException) as exc:
            raise NoPriorResult(f"replay of {step.value} for {doc_id} failed: {exc}")
        if resp.status_code == 404:
            raise NoPriorResult(f"{service} has no result for {doc_id}")
        resp.raise_for_status()
        return resp.json()

    def recover_pending(self) -> Dict[str, str]:
        """Startup pass: re-drive every document in a non-terminal state."""
        actions: Dict[str, str] = {}
        for doc_id in self.store.keys(DOCUMENTS):
            action = self._recover_document(doc_id)
            if action:
                actions[doc_id] = action
        return actions

    def _recover_document(self, doc_id: str) -> Optional[str]:
        with self._lock_for(doc_id):
            status = self.get_status(doc_id)
            state = status.state
            if state in (DocState.COMPLETED, DocState.FAILED):
                return None
            if state is DocState.RECEIVED:
                self._publish_step(doc_id, Step.PREPROCESS,
                                   bump_attempts=not status.attempts.get("Preprocess"))
                return "republished Preprocess"
            if state in (DocState.PREPROCESSED, DocState.TERMS_EXTRACTED):
                step = {
                    DocState.PREPROCESSED: Step.TERM_EXTRACT,
                    DocState.TERMS_EXTRACTED: Step.SIM_COMPUTE,
                }[state]
                self._publish_step(doc_id, step, bump_attempts=True)
                return f"published {step.value}"
            # in-progress: prefer the synchronous replay interface, fall back
            # to re-publishing the async request
            step = {
                DocState.PREPROCESSING: Step.PREPROCESS,
                DocState.EXTRACTING_TERMS: Step.TERM_EXTRACT,
                DocState.COMPUTING_SIMILARITY: Step.SIM_COMPUTE,
            }[state]
        try:
            output = self.recover_step(doc_id, step)
        except NoPriorResult:
            with self._lock_for(doc_id):
                self._publish_step(doc_id, step, bump_attempts=False)
            return f"republished {step.value}"
        normalized = self._normalize_replayed_output(step, output)
        self.advance_on_reply(StepReply(doc_id=doc_id, step=step, ok=True, output=normalized))
        return f"replayed {step.value}"

    @staticmethod
    def _normalize_replayed_output(step: Step, output: Dict[str, Any]) -> Dict[str, Any]:
        # replay endpoints return the same shapes the async replies carry
        return output

    # ------------------------------------------------------------------
    # internals

    def _set_status(self, doc_id: str, new_status: DocumentStatus,
                    force: bool = False) -> DocumentStatus:
        raw = self.store.get(DOCUMENTS, doc_id)
        if raw is None:
            raise UnknownDocument(doc_id)
        current = DocumentStatus.from_dict(raw["status"])
        if current == new_status:
            return current
        same_state = current.state is new_status.state
        if not force and not same_state and not validate_status_transition(current, new_status):
            log.error(
                "refusing invalid transition %s -> %s for %s",
                current.state.value, new_status.state.value, doc_id,
            )
            return current
        raw["status"] = new_status.to_dict()
        self.store.put(DOCUMENTS, doc_id, raw)
        return new_status

    def _publish_step(self, doc_id: str, step: Step, bump_attempts: bool,
                      via_done_state: Optional[DocState] = None) -> None:
        raw = self.store.get(DOCUMENTS, doc_id)
        status = DocumentStatus.from_dict(raw["status"])
        payload = self._build_step_payload(doc_id, step, raw)
        request = PipelineStepRequest(doc_id=doc_id, step=step, input_payload=payload)
        try:
            self.bus.publish(REQUEST_QUEUES[step], doc_id, "PipelineStepRequest",
                             request.to_dict())
        except requests.RequestException as exc:
            raise StorageFailure(f"message bus unreachable: {exc}") from exc

        attempts = dict(status.attempts)
        if bump_attempts:
            attempts[step.value] = attempts.get(step.value, 0) + 1
        if via_done_state is not None:
            self._set_status(doc_id, DocumentStatus(state=via_done_state,
                                                    attempts=status.attempts))
        self._set_status(
            doc_id,
            DocumentStatus(state=IN_PROGRESS_STATE[step], attempts=attempts),
        )

    def _build_step_payload(self, doc_id: str, step: Step, raw: Dict[str, Any]) -> Dict[str, Any]:
        if step is Step.PREPROCESS:
            return {k: v for k, v in raw.items()}
        outputs = self.store.get(STEP_OUTPUTS, doc_id, default={})
        if step is Step.TERM_EXTRACT:
            return outputs[Step.PREPROCESS.value]
        return {
            "term_extraction": outputs[Step.TERM_EXTRACT.value],
            "extracted_text": outputs[Step.PREPROCESS.value],
        }

    def _publish_completion(self, doc_id: str) -> None:
        if self.store.contains(NOTIFIED, doc_id):
            return
        raw = self.store.get(DOCUMENTS, doc_id)
        outputs = self.store.get(STEP_OUTPUTS, doc_id, default={})
        keywords = TermExtractionResult.from_dict(outputs[Step.TERM_EXTRACT.value])
        similarities = tuple(
            SimilarityRecord.from_dict(r)
            for r in outputs[Step.SIM_COMPUTE.value]["similarities"]
        )
        notice = CompletionNotice(
            doc_id=doc_id,
            filename=raw["filename"],
            keywords=keywords,
            similarities=similarities,
            extracted_text_ref=True,
        )
        for queue in INGEST_QUEUES:
            self.bus.publish(queue, doc_id, "CompletionNotice", notice.to_dict())
        self.bus.publish(ONTOLEARN_QUEUE, doc_id, "OntolearnIngest", {
            "term_extraction": outputs[Step.TERM_EXTRACT.value],
            "extracted_text": outputs[Step.PREPROCESS.value],
        })
        self.store.put(NOTIFIED, doc_id, True)
