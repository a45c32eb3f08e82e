"""Similarity computation: cosine oracle, duplicate pairs, read-path purity."""

import pytest

from docukd.errors import NoPriorResult, UnknownDocument
from docukd.model import new_document_id
from docukd.simcomputation.service import SimComputationService
from docukd.simcomputation.vectors import MATH_CALLS, cosine, reset_math_calls
from docukd.store import DocStore
from docukd.termextraction.stopwords import DEFAULT_STOPWORDS

from oracles import ref_all_pairs_cosine

SIX_DOC_CORPUS = [
    "cognitive systems learn from sensor data streams",
    "cognitive systems learn from sensor data streams",  # byte copy of doc 0
    "neural network engine controls adjust vehicle speed",
    "sensor fusion combines radar data with camera data",
    "patent claims describe a turbine cooling method",
    "turbine blades and engine cooling in the vehicle",
]


@pytest.fixture
def service(tmp_path):
    return SimComputationService(DocStore(str(tmp_path)))


def ingest_corpus(service, texts):
    doc_ids = [new_document_id() for _ in texts]
    for doc_id, text in zip(doc_ids, texts):
        service.compute_similarities(doc_id, text)
    return doc_ids


class TestComputeSimilarities:
    def test_first_document_has_no_neighbors(self, service):
        records = service.compute_similarities(new_document_id(), "alpha beta gamma")
        assert records == []

    def test_duplicate_documents_are_mutual_top1_at_one(self, service):
        a, b = new_document_id(), new_document_id()
        text = "cognitive systems learn from sensor data"
        service.compute_similarities(a, text)
        records = service.compute_similarities(b, text)
        assert len(records) == 1
        assert records[0].score == pytest.approx(1.0, abs=1e-9)
        top_a = service.top_similar(a, 1)
        top_b = service.top_similar(b, 1)
        assert top_a == [(b, pytest.approx(1.0, abs=1e-9))]
        assert top_b == [(a, pytest.approx(1.0, abs=1e-9))]

    def test_six_doc_all_pairs_match_brute_force(self, service):
        doc_ids = ingest_corpus(service, SIX_DOC_CORPUS)
        oracle = ref_all_pairs_cosine(SIX_DOC_CORPUS, DEFAULT_STOPWORDS)
        for (i, j), expected in oracle.items():
            pairs = dict(service.top_similar(doc_ids[i], limit=100))
            got = pairs.get(doc_ids[j], 0.0)
            assert got == pytest.approx(expected, abs=1e-9), (i, j)

    def test_all_scores_within_unit_range(self, service):
        doc_ids = ingest_corpus(service, SIX_DOC_CORPUS)
        for doc_id in doc_ids:
            for _, score in service.top_similar(doc_id, limit=100):
                assert 0.0 <= score <= 1.0

    def test_idempotent_per_doc(self, service):
        a, b = new_document_id(), new_document_id()
        service.compute_similarities(a, "alpha beta")
        first = service.compute_similarities(b, "alpha beta gamma")
        again = service.compute_similarities(b, "alpha beta gamma")
        assert first == again
        assert len(service.top_similar(a, 10)) == 1

    def test_disjoint_documents_share_nothing(self, service):
        a, b = new_document_id(), new_document_id()
        service.compute_similarities(a, "alpha beta gamma")
        records = service.compute_similarities(b, "delta epsilon zeta")
        assert records == []


class TestReflexivityAndSymmetry:
    def test_stored_vectors_are_self_similar(self, service):
        doc_ids = ingest_corpus(service, SIX_DOC_CORPUS[:4])
        for doc_id in doc_ids:
            vector = service.vector_of(doc_id)
            assert cosine(vector, vector) == pytest.approx(1.0, abs=1e-9)

    def test_norm_matches_weights(self, service):
        import math
        doc_ids = ingest_corpus(service, SIX_DOC_CORPUS[:3])
        for doc_id in doc_ids:
            vector = service.vector_of(doc_id)
            direct = math.sqrt(sum(w * w for w in vector.weights.values()))
            assert vector.norm == pytest.approx(direct, rel=1e-12)

    def test_symmetric_lookup(self, service):
        a, b = sorted([new_document_id(), new_document_id()])
        service.compute_similarities(a, "alpha beta gamma")
        service.compute_similarities(b, "alpha beta delta")
        from_a = dict(service.top_similar(a, 10))
        from_b = dict(service.top_similar(b, 10))
        assert from_a[b] == from_b[a]


class TestReadPathPurity:
    def test_top_similar_issues_no_vector_math(self, service):
        doc_ids = ingest_corpus(service, SIX_DOC_CORPUS)
        reset_math_calls()
        for doc_id in doc_ids:
            service.top_similar(doc_id, limit=10)
        assert MATH_CALLS == {"cosine": 0, "norm": 0}

    def test_limit_zero_returns_nothing(self, service):
        (doc_id,) = ingest_corpus(service, ["alpha beta"])
        assert service.top_similar(doc_id, 0) == []

    def test_unknown_document(self, service):
        with pytest.raises(UnknownDocument):
            service.top_similar(new_document_id(), 5)


class TestNeighborEviction:
    def test_top_m_bound_and_weakest_eviction(self, tmp_path):
        service = SimComputationService(DocStore(str(tmp_path)), top_m=2)
        base = new_document_id()
        service.compute_similarities(base, "alpha beta gamma delta")
        # three documents sharing progressively more terms with base
        weak = new_document_id()
        service.compute_similarities(weak, "alpha zeta eta theta")
        mid = new_document_id()
        service.compute_similarities(mid, "alpha beta iota kappa")
        strong = new_document_id()
        service.compute_similarities(strong, "alpha beta gamma lambda")
        top = service.top_similar(base, 10)
        assert len(top) <= 3  # retained pairs can exceed M only via other endpoints
        stored = service.store.get("neighbors", base)
        assert len(stored) == 2  # the owned list is truncated to M


class TestReplay:
    def test_replay_equals_compute(self, service):
        a, b = new_document_id(), new_document_id()
        service.compute_similarities(a, "alpha beta")
        records = service.compute_similarities(b, "alpha beta")
        assert service.replay_result(b) == records

    def test_replay_unknown(self, service):
        with pytest.raises(NoPriorResult):
            service.replay_result(new_document_id())

    def test_replay_survives_restart(self, tmp_path):
        service = SimComputationService(DocStore(str(tmp_path)))
        a, b = new_document_id(), new_document_id()
        service.compute_similarities(a, "alpha beta")
        records = service.compute_similarities(b, "alpha gamma")
        reborn = SimComputationService(DocStore(str(tmp_path)))
        assert reborn.replay_result(b) == records
