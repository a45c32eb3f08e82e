"""NL query path: pattern parsing, render/parse round-trip, plan execution,
row-level equality with the searching service on identical data."""

import pytest
from hypothesis import given, settings, strategies as st

from docukd.errors import UnknownDocument, UnparsableQuery, ValidationError
from docukd.model import DEFAULT_QUERY_LIMIT, QueryAst, QueryKind, new_document_id
from docukd.nliprocessing.app import NliService
from docukd.nliprocessing.patterns import (
    DEFAULT_PATTERNS,
    QuestionParser,
    load_patterns,
    render_question,
)
from docukd.nliprocessing.relstore import RelationalStore
from docukd.nliprocessing.translate import translate
from docukd.searching.index import SearchIndex
from docukd.store import DocStore

from helpers import make_notice


@pytest.fixture
def parser():
    return QuestionParser()


@pytest.fixture
def service(tmp_path):
    return NliService(RelationalStore(str(tmp_path / "nli.db")))


class TestParse:
    def test_scenario_sentence(self, parser):
        _, ast = parser.parse("Show me all applications with the keyword cognitive systems")
        assert ast == QueryAst(kind=QueryKind.KEYWORD_SEARCH,
                               keyword="cognitive systems",
                               limit=DEFAULT_QUERY_LIMIT)

    def test_similar_documents_pattern(self, parser):
        doc_id = new_document_id()
        _, ast = parser.parse(f"show documents similar to {doc_id}")
        assert ast.kind is QueryKind.SIMILAR_DOCUMENTS
        assert ast.doc_id == doc_id
        assert ast.limit == DEFAULT_QUERY_LIMIT

    def test_list_keywords_pattern(self, parser):
        doc_id = new_document_id()
        pattern_id, ast = parser.parse(f"list keywords of {doc_id}")
        assert pattern_id == "list-keywords"
        assert ast.kind is QueryKind.LIST_KEYWORDS

    def test_optional_words_and_case(self, parser):
        for question in [
            "show all documents with keyword sensors",
            "SHOW ME ALL APPLICATIONS WITH THE KEYWORD SENSORS",
            "show me all documents with the keyword sensors?",
        ]:
            _, ast = parser.parse(question)
            assert ast.keyword == "sensors"

    def test_top_limit_suffix(self, parser):
        _, ast = parser.parse("show me all applications with the keyword sensors top 5")
        assert ast == QueryAst(kind=QueryKind.KEYWORD_SEARCH, keyword="sensors", limit=5)

    def test_gibberish_yields_suggestions(self, parser):
        with pytest.raises(UnparsableQuery) as err:
            parser.parse("qwtz brrk")
        assert len(err.value.details["suggestions"]) == len(DEFAULT_PATTERNS)

    def test_empty_question(self, parser):
        with pytest.raises(ValidationError):
            parser.parse("   ")

    keywords = st.lists(
        st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=3, max_size=8)
        .filter(lambda w: w != "top"),
        min_size=1, max_size=3,
    ).map(" ".join)
    limits = st.one_of(st.just(DEFAULT_QUERY_LIMIT), st.integers(1, 99))

    @settings(max_examples=150)
    @given(data=st.data())
    def test_render_parse_roundtrip(self, data):
        parser = QuestionParser()
        kind = data.draw(st.sampled_from(list(QueryKind)))
        limit = data.draw(self.limits)
        if kind is QueryKind.KEYWORD_SEARCH:
            ast = QueryAst(kind=kind, keyword=data.draw(self.keywords), limit=limit)
        else:
            ast = QueryAst(kind=kind, doc_id=new_document_id(), limit=limit)
        _, parsed = parser.parse(render_question(ast))
        assert parsed == ast

    def test_pattern_file_override(self, tmp_path):
        path = tmp_path / "patterns.json"
        path.write_text(
            '[{"pattern_id": "find", "template": "find <KEYWORD>",'
            ' "target": "KeywordSearch"}]'
        )
        parser = QuestionParser(load_patterns(str(path)))
        pattern_id, ast = parser.parse("find gearboxes")
        assert pattern_id == "find"
        assert ast.keyword == "gearboxes"


class TestTranslate:
    def test_keyword_search_plan_shape(self):
        plan = translate(QueryAst(kind=QueryKind.KEYWORD_SEARCH, keyword="x", limit=5))
        assert "JOIN documents" in plan.sql
        assert "ORDER BY k.score DESC, k.doc_id ASC" in plan.sql
        assert plan.params == ("x", 5)

    def test_similar_documents_plan_matches_either_column(self):
        doc_id = new_document_id()
        plan = translate(QueryAst(kind=QueryKind.SIMILAR_DOCUMENTS, doc_id=doc_id))
        assert "doc_a = ? OR doc_b = ?" in plan.sql
        assert plan.resolve_neighbor == doc_id

    def test_list_keywords_plan_shape(self):
        plan = translate(QueryAst(kind=QueryKind.LIST_KEYWORDS,
                                  doc_id=new_document_id()))
        assert "FROM keywords WHERE doc_id = ?" in plan.sql
        assert "ORDER BY score DESC, term ASC" in plan.sql


def seed_both(tmp_path):
    """Feed identical notices to searching and nli stores."""
    searching = SearchIndex(DocStore(str(tmp_path / "searching")))
    nli = NliService(RelationalStore(str(tmp_path / "nli.db")))
    base = make_notice(filename="base.txt",
                       keywords=[("cognitive systems", 0.8), ("sensors", 0.3)])
    notices = [base]
    for i, score in enumerate([0.5, 0.9, 0.9]):
        notices.append(make_notice(
            filename=f"doc{i}.txt",
            keywords=[("cognitive systems", score)],
            similarities=[(base.doc_id, round(0.3 + 0.2 * i, 3))],
        ))
    for notice in notices:
        searching.ingest(notice)
        nli.ingest(notice)
    return searching, nli, notices


class TestAnswerEquivalence:
    def test_keyword_question_equals_searching_rows(self, tmp_path):
        searching, nli, _ = seed_both(tmp_path)
        direct = searching.search_by_keyword("cognitive systems", DEFAULT_QUERY_LIMIT)
        answered = nli.answer("Show me all applications with the keyword cognitive systems")
        assert answered.rows == direct.rows
        assert answered.columns == direct.columns

    def test_similar_question_equals_searching_rows(self, tmp_path):
        searching, nli, notices = seed_both(tmp_path)
        base = notices[0].doc_id
        direct = searching.similar_documents(base, DEFAULT_QUERY_LIMIT)
        answered = nli.answer(f"show me documents similar to {base}")
        assert answered.rows == direct.rows

    def test_list_keywords_question_equals_searching_rows(self, tmp_path):
        searching, nli, notices = seed_both(tmp_path)
        base = notices[0].doc_id
        direct = searching.keywords_of(base)
        answered = nli.answer(f"list the keywords of document {base}")
        assert answered.rows == direct.rows

    def test_unknown_doc_in_question(self, service):
        with pytest.raises(UnknownDocument):
            service.answer(f"list keywords of {new_document_id()}")

    def test_list_keywords_on_ingested_doc_without_keywords(self, tmp_path):
        nli = NliService(RelationalStore(str(tmp_path / "nli.db")))
        notice = make_notice(keywords=[])
        nli.ingest(notice)
        assert nli.answer(f"list keywords of {notice.doc_id}").rows == ()

    def test_query_kind_is_pattern_id(self, tmp_path):
        _, nli, _ = seed_both(tmp_path)
        answered = nli.answer("show me all documents with the keyword sensors")
        assert answered.query_kind == "keyword-search"


class TestIngestIdempotency:
    def test_duplicate_notice_ignored(self, service):
        notice = make_notice(keywords=[("alpha", 0.5)])
        assert service.ingest(notice)
        assert not service.ingest(notice)
        assert service.store.data_version() == 1
