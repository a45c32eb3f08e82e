"""AST -> relational query plan over the service's SQL schema.

Plans stay inside the supported subset: single-table or single-join selects
with equality filters, order-by, and limit. Similar-document lookups match
either pair column; the executor resolves the opposite endpoint and its
filename afterwards (a lookup, not a computation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from ..model import QueryAst, QueryKind

KEYWORD_COLUMNS = ("doc_id", "filename", "score")
LISTING_COLUMNS = ("term", "score")


@dataclass(frozen=True)
class SqlPlan:
    kind: QueryKind
    sql: str
    params: Tuple
    columns: Tuple[str, ...]
    limit: int
    #: set when the executor must map pair rows to (neighbor, filename, score)
    resolve_neighbor: Optional[str] = None


def translate(ast: QueryAst) -> SqlPlan:
    if ast.kind is QueryKind.KEYWORD_SEARCH:
        return SqlPlan(
            kind=ast.kind,
            sql=(
                "SELECT k.doc_id, d.filename, k.score "
                "FROM keywords k JOIN documents d ON k.doc_id = d.doc_id "
                "WHERE k.term = ? "
                "ORDER BY k.score DESC, k.doc_id ASC LIMIT ?"
            ),
            params=(ast.keyword, ast.limit),
            columns=KEYWORD_COLUMNS,
            limit=ast.limit,
        )
    if ast.kind is QueryKind.SIMILAR_DOCUMENTS:
        return SqlPlan(
            kind=ast.kind,
            sql=(
                "SELECT doc_a, doc_b, score FROM similarities "
                "WHERE doc_a = ? OR doc_b = ? "
                "ORDER BY score DESC"
            ),
            params=(ast.doc_id, ast.doc_id),
            columns=KEYWORD_COLUMNS,
            limit=ast.limit,
            resolve_neighbor=ast.doc_id,
        )
    return SqlPlan(
        kind=ast.kind,
        sql=(
            "SELECT term, score FROM keywords WHERE doc_id = ? "
            "ORDER BY score DESC, term ASC"
        ),
        params=(ast.doc_id,),
        columns=LISTING_COLUMNS,
        limit=ast.limit,
    )
