"""Shared domain model: the vocabulary every service speaks.

All types are immutable values with JSON codecs (``to_dict``/``from_dict``).
Wire encoding is JSON throughout; timestamps are RFC 3339 UTC strings and
document ids are canonical lowercase UUIDs.
"""

from __future__ import annotations

import base64
import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .errors import ValidationError

DOCUMENT_ID_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$"
)

# A document id is a canonical lowercase RFC 4122 UUID string.
DocumentId = str


def new_document_id() -> DocumentId:
    """Mint a fresh document id (unique per upload, immutable afterwards)."""
    return str(uuid.uuid4())


def is_document_id(value: Any) -> bool:
    return isinstance(value, str) and bool(DOCUMENT_ID_RE.match(value))


def utc_now() -> str:
    """Current time as an RFC 3339 UTC string (sortable, locale-free)."""
    return datetime.now(timezone.utc).isoformat()


class DocState(str, Enum):
    RECEIVED = "Received"
    PREPROCESSING = "Preprocessing"
    PREPROCESSED = "Preprocessed"
    EXTRACTING_TERMS = "ExtractingTerms"
    TERMS_EXTRACTED = "TermsExtracted"
    COMPUTING_SIMILARITY = "ComputingSimilarity"
    COMPLETED = "Completed"
    FAILED = "Failed"


class Step(str, Enum):
    PREPROCESS = "Preprocess"
    TERM_EXTRACT = "TermExtract"
    SIM_COMPUTE = "SimCompute"


#: pipeline order of the worker steps
STEP_ORDER: Tuple[Step, ...] = (Step.PREPROCESS, Step.TERM_EXTRACT, Step.SIM_COMPUTE)

#: per-step in-progress state
IN_PROGRESS_STATE: Dict[Step, DocState] = {
    Step.PREPROCESS: DocState.PREPROCESSING,
    Step.TERM_EXTRACT: DocState.EXTRACTING_TERMS,
    Step.SIM_COMPUTE: DocState.COMPUTING_SIMILARITY,
}

#: per-step completed state (the final step completes the document)
DONE_STATE: Dict[Step, DocState] = {
    Step.PREPROCESS: DocState.PREPROCESSED,
    Step.TERM_EXTRACT: DocState.TERMS_EXTRACTED,
    Step.SIM_COMPUTE: DocState.COMPLETED,
}

STEP_OF_IN_PROGRESS: Dict[DocState, Step] = {v: k for k, v in IN_PROGRESS_STATE.items()}

_FORWARD_EDGES = {
    (DocState.RECEIVED, DocState.PREPROCESSING),
    (DocState.PREPROCESSING, DocState.PREPROCESSED),
    (DocState.PREPROCESSED, DocState.EXTRACTING_TERMS),
    (DocState.EXTRACTING_TERMS, DocState.TERMS_EXTRACTED),
    (DocState.TERMS_EXTRACTED, DocState.COMPUTING_SIMILARITY),
    (DocState.COMPUTING_SIMILARITY, DocState.COMPLETED),
}


@dataclass(frozen=True)
class DocumentStatus:
    """Pipeline state of one document, tracked by the orchestrator."""

    state: DocState
    failed_step: Optional[Step] = None
    reason: Optional[str] = None
    attempts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.state is DocState.FAILED:
            if self.failed_step is None or self.reason is None:
                raise ValidationError("Failed status requires failed_step and reason")
        elif self.failed_step is not None or self.reason is not None:
            raise ValidationError("failed_step/reason are only valid on Failed status")
        for step, count in self.attempts.items():
            if step not in Step._value2member_map_ or count < 0:
                raise ValidationError(f"bad attempts entry: {step}={count}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "state": self.state.value,
            "failed_step": self.failed_step.value if self.failed_step else None,
            "reason": self.reason,
            "attempts": dict(self.attempts),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "DocumentStatus":
        return cls(
            state=DocState(d["state"]),
            failed_step=Step(d["failed_step"]) if d.get("failed_step") else None,
            reason=d.get("reason"),
            attempts={k: int(v) for k, v in (d.get("attempts") or {}).items()},
        )


def validate_status_transition(from_status: DocumentStatus, to_status: DocumentStatus) -> bool:
    """True iff the pair of statuses is an edge of the pipeline state machine.

    Forward edges run Received through Completed; any in-progress state may
    fail; a Failed document may only re-enter the in-progress state of the
    step it failed in.
    """
    a, b = from_status.state, to_status.state
    if (a, b) in _FORWARD_EDGES:
        return True
    if b is DocState.FAILED and a in STEP_OF_IN_PROGRESS:
        return to_status.failed_step == STEP_OF_IN_PROGRESS[a]
    if a is DocState.FAILED and from_status.failed_step is not None:
        return b is IN_PROGRESS_STATE[from_status.failed_step]
    return False


@dataclass(frozen=True)
class DocumentRecord:
    """An uploaded document plus its pipeline status."""

    doc_id: DocumentId
    filename: str
    media_type: str
    content: bytes
    uploaded_at: str
    status: DocumentStatus

    def __post_init__(self) -> None:
        if not is_document_id(self.doc_id):
            raise ValidationError(f"not a document id: {self.doc_id!r}")
        if not self.content:
            raise ValidationError("document content is empty")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "filename": self.filename,
            "media_type": self.media_type,
            "content": base64.b64encode(self.content).decode("ascii"),
            "uploaded_at": self.uploaded_at,
            "status": self.status.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "DocumentRecord":
        return cls(
            doc_id=d["doc_id"],
            filename=d["filename"],
            media_type=d["media_type"],
            content=base64.b64decode(d["content"]),
            uploaded_at=d["uploaded_at"],
            status=DocumentStatus.from_dict(d["status"]),
        )


@dataclass(frozen=True)
class ExtractedText:
    """Machine-readable text recovered from a document."""

    doc_id: DocumentId
    text: str
    extractor: str

    def __post_init__(self) -> None:
        if "\x00" in self.text:
            raise ValidationError("extracted text contains NUL bytes")

    def to_dict(self) -> Dict[str, Any]:
        return {"doc_id": self.doc_id, "text": self.text, "extractor": self.extractor}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExtractedText":
        return cls(doc_id=d["doc_id"], text=d["text"], extractor=d["extractor"])


@dataclass(frozen=True)
class Keyword:
    """One scored term; the producing algorithm is always named."""

    term: str
    score: float
    algorithm: str

    def __post_init__(self) -> None:
        if not self.term or self.term != self.term.strip():
            raise ValidationError(f"bad keyword term: {self.term!r}")
        if self.term != self.term.lower():
            raise ValidationError(f"keyword term must be lowercase: {self.term!r}")
        if self.score < 0:
            raise ValidationError(f"negative keyword score: {self.score}")
        if not self.algorithm:
            raise ValidationError("keyword algorithm must be provided")

    def to_dict(self) -> Dict[str, Any]:
        return {"term": self.term, "score": self.score, "algorithm": self.algorithm}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Keyword":
        return cls(term=d["term"], score=float(d["score"]), algorithm=d["algorithm"])


@dataclass(frozen=True)
class TermExtractionResult:
    """Top keywords of one document, strictly ordered (score desc, term asc)."""

    doc_id: DocumentId
    keywords: Tuple[Keyword, ...]
    algorithm: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", tuple(self.keywords))
        terms = [k.term for k in self.keywords]
        if len(set(terms)) != len(terms):
            raise ValidationError("duplicate keyword terms")
        order = [(-k.score, k.term) for k in self.keywords]
        if order != sorted(order):
            raise ValidationError("keywords not ordered by (score desc, term asc)")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "keywords": [k.to_dict() for k in self.keywords],
            "algorithm": self.algorithm,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "TermExtractionResult":
        return cls(
            doc_id=d["doc_id"],
            keywords=tuple(Keyword.from_dict(k) for k in d["keywords"]),
            algorithm=d["algorithm"],
        )


@dataclass(frozen=True)
class SimilarityRecord:
    """Cosine similarity of a document pair, stored canonically (doc_a < doc_b)."""

    doc_a: DocumentId
    doc_b: DocumentId
    score: float
    algorithm: str

    def __post_init__(self) -> None:
        if self.doc_a == self.doc_b:
            raise ValidationError("similarity of a document with itself")
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"similarity score out of range: {self.score}")
        if self.doc_a > self.doc_b:
            a, b = self.doc_b, self.doc_a
            object.__setattr__(self, "doc_a", a)
            object.__setattr__(self, "doc_b", b)

    def other(self, doc_id: DocumentId) -> DocumentId:
        return self.doc_b if doc_id == self.doc_a else self.doc_a

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_a": self.doc_a,
            "doc_b": self.doc_b,
            "score": self.score,
            "algorithm": self.algorithm,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SimilarityRecord":
        return cls(
            doc_a=d["doc_a"],
            doc_b=d["doc_b"],
            score=float(d["score"]),
            algorithm=d["algorithm"],
        )


class QueryKind(str, Enum):
    KEYWORD_SEARCH = "KeywordSearch"
    SIMILAR_DOCUMENTS = "SimilarDocuments"
    LIST_KEYWORDS = "ListKeywords"


DEFAULT_QUERY_LIMIT = 20


@dataclass(frozen=True)
class QueryAst:
    """A structured query, built from REST parameters or an NL question."""

    kind: QueryKind
    keyword: Optional[str] = None
    doc_id: Optional[DocumentId] = None
    limit: int = DEFAULT_QUERY_LIMIT

    def __post_init__(self) -> None:
        if self.limit <= 0:
            raise ValidationError("query limit must be positive")
        if self.kind is QueryKind.KEYWORD_SEARCH:
            if not self.keyword or self.doc_id is not None:
                raise ValidationError("KeywordSearch takes exactly a keyword")
        else:
            if self.keyword is not None or not self.doc_id:
                raise ValidationError(f"{self.kind.value} takes exactly a doc_id")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "keyword": self.keyword,
            "doc_id": self.doc_id,
            "limit": self.limit,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "QueryAst":
        return cls(
            kind=QueryKind(d["kind"]),
            keyword=d.get("keyword"),
            doc_id=d.get("doc_id"),
            limit=int(d.get("limit", DEFAULT_QUERY_LIMIT)),
        )


@dataclass(frozen=True)
class QueryResult:
    """Generic tabular result: free-text queries have no fixed shape."""

    query_kind: str
    columns: Tuple[str, ...]
    rows: Tuple[Tuple[Any, ...], ...]
    data_version: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError("row width does not match columns")
        if self.data_version < 0:
            raise ValidationError("data_version must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "query_kind": self.query_kind,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
            "data_version": self.data_version,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "QueryResult":
        return cls(
            query_kind=d["query_kind"],
            columns=tuple(d["columns"]),
            rows=tuple(tuple(r) for r in d["rows"]),
            data_version=int(d.get("data_version", 0)),
        )


def relevance_sorted(rows: List[Tuple[Any, ...]], score_col: int, id_col: int) -> List[Tuple[Any, ...]]:
    """Sort result rows by relevance: score descending, then doc_id ascending."""
    return sorted(rows, key=lambda r: (-r[score_col], r[id_col]))


@dataclass(frozen=True)
class PipelineStepRequest:
    """Work order for one pipeline step; the payload type matches the step."""

    doc_id: DocumentId
    step: Step
    input_payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "step": self.step.value,
            "input_payload": self.input_payload,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PipelineStepRequest":
        return cls(doc_id=d["doc_id"], step=Step(d["step"]), input_payload=d["input_payload"])


@dataclass(frozen=True)
class StepReply:
    """Asynchronous outcome of a pipeline step, reported back by a worker."""

    doc_id: DocumentId
    step: Step
    ok: bool
    output: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "step": self.step.value,
            "ok": self.ok,
            "output": self.output,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "StepReply":
        return cls(
            doc_id=d["doc_id"],
            step=Step(d["step"]),
            ok=bool(d["ok"]),
            output=d.get("output"),
            error=d.get("error"),
        )


@dataclass(frozen=True)
class CompletionNotice:
    """Fan-out message for a fully processed document.

    Carries the filename so downstream query stores can render result rows
    without calling back into document processing.
    """

    doc_id: DocumentId
    filename: str
    keywords: TermExtractionResult
    similarities: Tuple[SimilarityRecord, ...]
    extracted_text_ref: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "similarities", tuple(self.similarities))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "filename": self.filename,
            "keywords": self.keywords.to_dict(),
            "similarities": [s.to_dict() for s in self.similarities],
            "extracted_text_ref": self.extracted_text_ref,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "CompletionNotice":
        return cls(
            doc_id=d["doc_id"],
            filename=d["filename"],
            keywords=TermExtractionResult.from_dict(d["keywords"]),
            similarities=tuple(SimilarityRecord.from_dict(s) for s in d["similarities"]),
            extracted_text_ref=bool(d.get("extracted_text_ref", True)),
        )
