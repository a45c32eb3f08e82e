"""Document vectors and cosine similarity.

Vectors span ALL kept tokens (unigrams and adjacent bigrams), not just the
top keywords: cosine over a 10-term keyword list would be degenerate. The
math functions count their invocations so read paths can prove they do no
similarity computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

from ..termextraction.tfidf import CorpusStats, score_terms

ALGORITHM = "cosine-tfidf-v1"

#: instrumentation: bumped on every vector-math call (see acceptance checks)
MATH_CALLS = {"cosine": 0, "norm": 0}


def reset_math_calls() -> None:
    MATH_CALLS["cosine"] = 0
    MATH_CALLS["norm"] = 0


@dataclass(frozen=True)
class DocVector:
    doc_id: str
    weights: Dict[str, float]
    norm: float

    def to_dict(self) -> Dict:
        return {"doc_id": self.doc_id, "weights": dict(self.weights), "norm": self.norm}

    @classmethod
    def from_dict(cls, d: Dict) -> "DocVector":
        return cls(doc_id=d["doc_id"], weights=dict(d["weights"]), norm=float(d["norm"]))


def euclidean_norm(weights: Dict[str, float]) -> float:
    MATH_CALLS["norm"] += 1
    return math.sqrt(sum(w * w for w in weights.values()))


def build_vector(doc_id: str, counts: Dict[str, int], total: int,
                 stats: CorpusStats) -> DocVector:
    """tf-idf weights over every candidate term, same formula as keyword scoring."""
    weights = score_terms(counts, total, stats)
    return DocVector(doc_id=doc_id, weights=weights, norm=euclidean_norm(weights))


def cosine(a: DocVector, b: DocVector) -> float:
    MATH_CALLS["cosine"] += 1
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    small, large = (a.weights, b.weights) if len(a.weights) <= len(b.weights) else (b.weights, a.weights)
    dot = sum(w * large.get(term, 0.0) for term, w in small.items())
    value = dot / (a.norm * b.norm)
    # guard against floating-point drift just past 1.0
    return min(max(value, 0.0), 1.0)
