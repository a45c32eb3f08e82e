"""NL query service: parse -> translate -> execute, plus queue ingest."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

from fastapi import FastAPI
from pydantic import BaseModel

from ..errors import UnknownDocument
from ..httpapi import create_base_app
from ..model import CompletionNotice, QueryAst, QueryKind, QueryResult
from ..msgbus.broker import MessageEnvelope
from .patterns import DEFAULT_PATTERNS, NlPattern, QuestionParser
from .relstore import RelationalStore
from .translate import translate


class NliService:
    def __init__(self, store: RelationalStore,
                 patterns: Sequence[NlPattern] = DEFAULT_PATTERNS) -> None:
        self.store = store
        self.parser = QuestionParser(patterns)

    def parse(self, question: str) -> Tuple[str, QueryAst]:
        return self.parser.parse(question)

    def answer(self, question: str) -> QueryResult:
        pattern_id, ast = self.parse(question)
        plan = translate(ast)
        if ast.kind in (QueryKind.SIMILAR_DOCUMENTS, QueryKind.LIST_KEYWORDS):
            if not self.store.has_document(ast.doc_id):
                raise UnknownDocument(f"document {ast.doc_id} is not ingested")
        return self.store.execute_plan(plan, query_kind=pattern_id)

    def ingest(self, notice: CompletionNotice) -> bool:
        return self.store.ingest(notice)


class Question(BaseModel):
    question: str


def create_app(service: NliService) -> FastAPI:
    app = create_base_app("nliprocessing")
    app.state.service = service

    @app.post("/internal/nli/answer")
    def answer(body: Question):
        return service.answer(body.question).to_dict()

    return app


def make_ingest_handler(service: NliService):
    def handle(envelope: MessageEnvelope) -> None:
        service.ingest(CompletionNotice.from_dict(envelope.payload))
    return handle
