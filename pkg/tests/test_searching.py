"""Search store: ingest idempotency, relevance ordering, scan-oracle equality."""

import pytest

from docukd.errors import UnknownDocument, ValidationError
from docukd.model import new_document_id
from docukd.searching.index import SearchIndex
from docukd.store import DocStore

from helpers import make_notice


@pytest.fixture
def index(tmp_path):
    return SearchIndex(DocStore(str(tmp_path)))


class TestIngest:
    def test_ingested_doc_is_queryable(self, index):
        notice = make_notice(keywords=[("cognitive systems", 0.5)])
        assert index.ingest(notice)
        result = index.search_by_keyword("cognitive systems", 10)
        assert [r[0] for r in result.rows] == [notice.doc_id]
        assert result.rows[0][1] == "doc.txt"

    def test_duplicate_notice_is_idempotent(self, index):
        notice = make_notice(keywords=[("alpha", 0.4)])
        assert index.ingest(notice)
        version = index.data_version()
        assert not index.ingest(notice)
        assert index.data_version() == version

    def test_version_strictly_monotone_per_new_doc(self, index):
        for n in range(1, 4):
            index.ingest(make_notice(keywords=[("alpha", 0.1)]))
            assert index.data_version() == n


class TestKeywordSearch:
    def test_unseen_keyword_is_empty_success(self, index):
        result = index.search_by_keyword("nothing", 10)
        assert result.rows == ()

    def test_empty_keyword_rejected(self, index):
        with pytest.raises(ValidationError):
            index.search_by_keyword("  ", 10)

    def test_normalization_matches_mixed_case(self, index):
        notice = make_notice(keywords=[("alpha", 0.4)])
        index.ingest(notice)
        assert index.search_by_keyword("  ALPHA ", 10).rows[0][0] == notice.doc_id

    def test_rows_sorted_by_relevance_and_equal_scan_oracle(self, index):
        notices = [
            make_notice(filename=f"f{i}.txt", keywords=[("alpha", score)])
            for i, score in enumerate([0.2, 0.9, 0.5, 0.9])
        ]
        for notice in notices:
            index.ingest(notice)
        result = index.search_by_keyword("alpha", 10)

        # brute-force oracle: scan every stored extraction result
        expected = []
        for notice in notices:
            for kw in notice.keywords.keywords:
                if kw.term == "alpha":
                    expected.append((notice.doc_id, f"{notice.filename}", kw.score))
        expected.sort(key=lambda r: (-r[2], r[0]))
        assert [tuple(r) for r in result.rows] == expected

    def test_limit_truncates(self, index):
        for score in (0.1, 0.2, 0.3):
            index.ingest(make_notice(keywords=[("alpha", score)]))
        assert len(index.search_by_keyword("alpha", 2).rows) == 2


class TestPerDocumentReads:
    def test_keywords_of_preserves_stored_order(self, index):
        notice = make_notice(keywords=[("beta", 0.5), ("alpha", 0.9), ("gamma", 0.1)])
        index.ingest(notice)
        result = index.keywords_of(notice.doc_id)
        assert [tuple(r) for r in result.rows] == [
            ("alpha", 0.9), ("beta", 0.5), ("gamma", 0.1),
        ]

    def test_unknown_document(self, index):
        with pytest.raises(UnknownDocument):
            index.keywords_of(new_document_id())
        with pytest.raises(UnknownDocument):
            index.similar_documents(new_document_id(), 5)

    def test_similar_documents_from_pair_store(self, index):
        first = make_notice(keywords=[("alpha", 0.5)])
        index.ingest(first)
        second = make_notice(keywords=[("alpha", 0.4)],
                             similarities=[(first.doc_id, 0.75)])
        index.ingest(second)
        rows = index.similar_documents(first.doc_id, 10).rows
        assert [r[0] for r in rows] == [second.doc_id]
        assert rows[0][2] == 0.75
        mirrored = index.similar_documents(second.doc_id, 10).rows
        assert [r[0] for r in mirrored] == [first.doc_id]

    def test_similarity_ties_break_by_doc_id(self, index):
        base = make_notice(keywords=[("alpha", 0.5)])
        index.ingest(base)
        others = [make_notice(keywords=[("alpha", 0.4)],
                              similarities=[(base.doc_id, 0.6)]) for _ in range(3)]
        for notice in others:
            index.ingest(notice)
        rows = index.similar_documents(base.doc_id, 10).rows
        assert [r[0] for r in rows] == sorted(n.doc_id for n in others)


class TestPersistence:
    def test_restart_preserves_index(self, tmp_path):
        index = SearchIndex(DocStore(str(tmp_path)))
        notice = make_notice(keywords=[("alpha", 0.4)])
        index.ingest(notice)
        reborn = SearchIndex(DocStore(str(tmp_path)))
        assert reborn.search_by_keyword("alpha", 10).rows[0][0] == notice.doc_id
        assert reborn.data_version() == 1
