"""Similarity worker: all similarity math happens at ingest time.

A new document is compared against every stored vector; the best pairs are
persisted (top M per document, updated symmetrically on both endpoints) so
that the query path later performs lookups only.
"""

from __future__ import annotations

import threading
from collections import Counter
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from ..clients import BusClient
from ..errors import NoPriorResult, NoTokens, UnknownDocument
from ..model import (
    ExtractedText,
    PipelineStepRequest,
    SimilarityRecord,
    Step,
    TermExtractionResult,
)
from ..store import DocStore
from ..termextraction.stopwords import DEFAULT_STOPWORDS
from ..termextraction.tfidf import CorpusStats, candidate_terms, tokenize
from ..worker import StepWorker
from .vectors import ALGORITHM, DocVector, build_vector, cosine

VECTORS = "vectors"
PAIRS = "similarities"
NEIGHBORS = "neighbors"
RESULTS = "results"
CORPUS_STATS = "corpus_stats"
STATS_KEY = "corpus"

DEFAULT_TOP_M = 20


def pair_key(a: str, b: str) -> str:
    return "|".join(sorted((a, b)))


class SimComputationService(StepWorker):
    step = Step.SIM_COMPUTE
    reply_queue = "q.simcomputation.res"

    def __init__(self, store: DocStore, bus: Optional[BusClient] = None,
                 top_m: int = DEFAULT_TOP_M,
                 stopwords: FrozenSet[str] = DEFAULT_STOPWORDS) -> None:
        super().__init__(bus)
        self.store = store
        self.top_m = top_m
        self.stopwords = stopwords
        # appends must be serialized: "compare against all existing" needs a
        # well-defined set of existing vectors
        self._write_lock = threading.Lock()

    # ------------------------------------------------------------------
    # ingest path

    def compute_similarities(self, doc_id: str, text: str) -> List[SimilarityRecord]:
        stored = self.store.get(RESULTS, doc_id)
        if stored is not None:
            return [SimilarityRecord.from_dict(r) for r in stored]
        with self._write_lock:
            stored = self.store.get(RESULTS, doc_id)
            if stored is not None:
                return [SimilarityRecord.from_dict(r) for r in stored]

            tokens = tokenize(text, self.stopwords)
            if not tokens:
                raise NoTokens("no tokens after filtering")
            candidates = candidate_terms(tokens)
            stats = CorpusStats.from_dict(self.store.get(CORPUS_STATS, STATS_KEY))
            stats.add_document(candidates)
            vector = build_vector(doc_id, dict(Counter(candidates)), len(candidates), stats)

            scored: List[Tuple[str, float]] = []
            for other_id in self.store.keys(VECTORS):
                if other_id == doc_id:
                    continue
                other = DocVector.from_dict(self.store.get(VECTORS, other_id))
                score = cosine(vector, other)
                if score > 0.0:
                    scored.append((other_id, score))
            scored.sort(key=lambda pair: (-pair[1], pair[0]))
            kept = scored[: self.top_m]

            records = [
                SimilarityRecord(doc_a=doc_id, doc_b=other_id, score=score,
                                 algorithm=ALGORITHM)
                for other_id, score in kept
            ]
            self.store.put(CORPUS_STATS, STATS_KEY, stats.to_dict())
            self.store.put(VECTORS, doc_id, vector.to_dict())
            for record in records:
                self.store.put(PAIRS, pair_key(record.doc_a, record.doc_b), record.to_dict())
            self.store.put(NEIGHBORS, doc_id, [[other, score] for other, score in kept])
            for other_id, score in kept:
                self._insert_neighbor(other_id, doc_id, score)
            self.store.put(RESULTS, doc_id, [r.to_dict() for r in records])
            return records

    def _insert_neighbor(self, owner: str, neighbor: str, score: float) -> None:
        entries: List[List] = self.store.get(NEIGHBORS, owner, default=[])
        entries = [e for e in entries if e[0] != neighbor]
        entries.append([neighbor, score])
        entries.sort(key=lambda e: (-e[1], e[0]))
        evicted = entries[self.top_m:]
        entries = entries[: self.top_m]
        self.store.put(NEIGHBORS, owner, entries)
        for gone, _ in evicted:
            self._drop_pair_if_orphaned(owner, gone)

    def _drop_pair_if_orphaned(self, a: str, b: str) -> None:
        # a pair record survives while either endpoint still lists it
        b_list = self.store.get(NEIGHBORS, b, default=[])
        if any(e[0] == a for e in b_list):
            return
        self.store.delete(PAIRS, pair_key(a, b))

    # ------------------------------------------------------------------
    # read paths: lookups only, no vector math

    def top_similar(self, doc_id: str, limit: int) -> List[Tuple[str, float]]:
        if not self.store.contains(VECTORS, doc_id):
            raise UnknownDocument(f"{doc_id} has not been processed")
        if limit <= 0:
            return []
        found: List[Tuple[str, float]] = []
        for key, record in self.store.items(PAIRS):
            a, b = key.split("|")
            if doc_id == a:
                found.append((b, record["score"]))
            elif doc_id == b:
                found.append((a, record["score"]))
        found.sort(key=lambda pair: (-pair[1], pair[0]))
        return found[:limit]

    def replay_result(self, doc_id: str) -> List[SimilarityRecord]:
        stored = self.store.get(RESULTS, doc_id)
        if stored is None:
            raise NoPriorResult(f"no similarities stored for {doc_id}")
        return [SimilarityRecord.from_dict(r) for r in stored]

    def vector_of(self, doc_id: str) -> DocVector:
        stored = self.store.get(VECTORS, doc_id)
        if stored is None:
            raise UnknownDocument(f"no vector for {doc_id}")
        return DocVector.from_dict(stored)

    # ------------------------------------------------------------------

    def process(self, request: PipelineStepRequest) -> Dict[str, Any]:
        extracted = ExtractedText.from_dict(request.input_payload["extracted_text"])
        # keyword payload rides along for schema completeness; vectors are
        # built from the full token stream
        TermExtractionResult.from_dict(request.input_payload["term_extraction"])
        records = self.compute_similarities(extracted.doc_id, extracted.text)
        return {"similarities": [r.to_dict() for r in records]}
