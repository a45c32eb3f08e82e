"""Term-extraction worker: corpus-stat upkeep, scoring, replay, reindex."""

from __future__ import annotations

import threading
from typing import Any, Dict, FrozenSet, Optional

from ..clients import BusClient
from ..errors import NoPriorResult
from ..model import ExtractedText, PipelineStepRequest, Step, TermExtractionResult
from ..store import DocStore
from ..worker import StepWorker
from .stopwords import DEFAULT_STOPWORDS
from .tfidf import DEFAULT_TOP_K, CorpusStats, extract_keywords, rescore

KEYWORDS = "keywords"
CORPUS_STATS = "corpus_stats"
DOC_TERMS = "doc_terms"
STATS_KEY = "corpus"


class TermExtractionService(StepWorker):
    step = Step.TERM_EXTRACT
    reply_queue = "q.termextraction.res"

    def __init__(self, store: DocStore, bus: Optional[BusClient] = None,
                 top_k: int = DEFAULT_TOP_K,
                 stopwords: FrozenSet[str] = DEFAULT_STOPWORDS) -> None:
        super().__init__(bus)
        self.store = store
        self.top_k = top_k
        self.stopwords = stopwords
        # stats update + scoring must see one consistent snapshot
        self._stats_lock = threading.Lock()

    def _load_stats(self) -> CorpusStats:
        return CorpusStats.from_dict(self.store.get(CORPUS_STATS, STATS_KEY))

    def extract(self, doc_id: str, text: str) -> TermExtractionResult:
        stored = self.store.get(KEYWORDS, doc_id)
        if stored is not None:
            return TermExtractionResult.from_dict(stored)
        with self._stats_lock:
            stored = self.store.get(KEYWORDS, doc_id)
            if stored is not None:
                return TermExtractionResult.from_dict(stored)
            stats = self._load_stats()
            # raises NoTokens before any state is touched
            result, counts, total = extract_keywords(
                doc_id, text, stats, top_k=self.top_k, stopwords=self.stopwords
            )
            self.store.put(CORPUS_STATS, STATS_KEY, stats.to_dict())
            self.store.put(DOC_TERMS, doc_id, {"counts": counts, "total": total})
            self.store.put(KEYWORDS, doc_id, result.to_dict())
            return result

    def replay_result(self, doc_id: str) -> TermExtractionResult:
        stored = self.store.get(KEYWORDS, doc_id)
        if stored is None:
            raise NoPriorResult(f"no keywords stored for {doc_id}")
        return TermExtractionResult.from_dict(stored)

    def reindex(self) -> int:
        """Rescore every stored document under the current corpus stats."""
        with self._stats_lock:
            stats = self._load_stats()
            count = 0
            for doc_id, terms in self.store.items(DOC_TERMS):
                result = rescore(doc_id, terms["counts"], terms["total"], stats, self.top_k)
                self.store.put(KEYWORDS, doc_id, result.to_dict())
                count += 1
            return count

    def process(self, request: PipelineStepRequest) -> Dict[str, Any]:
        extracted = ExtractedText.from_dict(request.input_payload)
        return self.extract(extracted.doc_id, extracted.text).to_dict()
