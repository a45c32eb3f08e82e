"""Keyword scoring: tf-idf over unigram and adjacent-bigram candidates.

Corpus statistics are incremental: a document is scored against the corpus
as of its own ingestion (document counts include it exactly once); earlier
documents keep their stored scores until an explicit reindex.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..errors import NoTokens
from ..model import Keyword, TermExtractionResult
from .stopwords import DEFAULT_STOPWORDS

ALGORITHM = "tfidf-v1"
DEFAULT_TOP_K = 10
MIN_TOKEN_LEN = 3


def tokenize(text: str, stopwords: FrozenSet[str] = DEFAULT_STOPWORDS) -> List[str]:
    """Lowercase alphanumeric word tokens, length >= 3, stopwords removed."""
    tokens: List[str] = []
    current: List[str] = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return [t for t in tokens if len(t) >= MIN_TOKEN_LEN and t not in stopwords]


def candidate_terms(tokens: List[str]) -> List[str]:
    """Unigrams plus adjacent bigrams, in document order."""
    bigrams = [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    return tokens + bigrams


@dataclass
class CorpusStats:
    """Document counts per candidate term across the corpus seen so far."""

    doc_count: int = 0
    doc_frequency: Dict[str, int] = field(default_factory=dict)

    def add_document(self, candidates: List[str]) -> None:
        self.doc_count += 1
        for term in set(candidates):
            self.doc_frequency[term] = self.doc_frequency.get(term, 0) + 1

    def df(self, term: str) -> int:
        return self.doc_frequency.get(term, 0)

    def to_dict(self) -> Dict:
        return {"doc_count": self.doc_count, "doc_frequency": dict(self.doc_frequency)}

    @classmethod
    def from_dict(cls, d: Optional[Dict]) -> "CorpusStats":
        if not d:
            return cls()
        return cls(doc_count=int(d["doc_count"]),
                   doc_frequency=dict(d["doc_frequency"]))


def idf(term: str, stats: CorpusStats) -> float:
    return math.log((1 + stats.doc_count) / (1 + stats.df(term))) + 1.0


def score_terms(counts: Dict[str, int], total: int, stats: CorpusStats) -> Dict[str, float]:
    """tf-idf per candidate term: (count/total) * (ln((1+N)/(1+df)) + 1)."""
    return {
        term: (count / total) * idf(term, stats)
        for term, count in counts.items()
    }


def extract_keywords(
    doc_id: str,
    text: str,
    stats: CorpusStats,
    top_k: int = DEFAULT_TOP_K,
    stopwords: FrozenSet[str] = DEFAULT_STOPWORDS,
) -> Tuple[TermExtractionResult, Dict[str, int], int]:
    """Add the document to the stats, then score it against that snapshot.

    Returns the result plus the candidate counts/total used, so callers can
    persist them for later rescoring. The caller guards against adding the
    same document twice.
    """
    tokens = tokenize(text, stopwords)
    if not tokens:
        raise NoTokens("no tokens after filtering")
    candidates = candidate_terms(tokens)
    stats.add_document(candidates)
    counts = dict(Counter(candidates))
    total = len(candidates)
    result = rescore(doc_id, counts, total, stats, top_k)
    return result, counts, total


def rescore(doc_id: str, counts: Dict[str, int], total: int, stats: CorpusStats,
            top_k: int = DEFAULT_TOP_K) -> TermExtractionResult:
    scores = score_terms(counts, total, stats)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    keywords = tuple(
        Keyword(term=term, score=score, algorithm=ALGORITHM) for term, score in ranked
    )
    return TermExtractionResult(doc_id=doc_id, keywords=keywords, algorithm=ALGORITHM)
