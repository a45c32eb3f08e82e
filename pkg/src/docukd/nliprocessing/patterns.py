"""Question templates: deterministic token patterns with typed slots.

A template is a space-separated sequence of words, groups, and slots:

* ``(word)``        optional literal
* ``(a|b)``         required choice
* ``<KEYWORD>``     free text reaching to the end of the question
* ``<DOCID>``       a UUID-shaped token
* ``<LIMIT>``       a positive integer

Every pattern accepts an optional ``top <LIMIT>`` suffix. Matching is
case-insensitive; the first matching pattern wins.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import UnparsableQuery, ValidationError
from ..model import DEFAULT_QUERY_LIMIT, QueryAst, QueryKind

UUID_FRAGMENT = r"[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}"

_SLOT_REGEX = {
    "KEYWORD": r"(?P<keyword>.+?)",
    "DOCID": rf"(?P<doc_id>{UUID_FRAGMENT})",
    "LIMIT": r"(?P<limit>\d+)",
}

_TRAILING_PUNCT = re.compile(r"[\s?.!;]+$")


@dataclass(frozen=True)
class NlPattern:
    pattern_id: str
    template: str
    target: QueryKind

    def compile(self) -> "CompiledPattern":
        pieces: List[str] = []
        for element in self.template.split():
            pieces.append(_element_regex(element, first=not pieces))
        body = "".join(pieces)
        regex = re.compile(
            rf"^{body}(?:\s+top\s+(?P<top_limit>\d+))?$", re.IGNORECASE
        )
        return CompiledPattern(self, regex)

    def example(self) -> str:
        """Render the canonical example sentence (optionals included)."""
        words: List[str] = []
        for element in self.template.split():
            if element.startswith("(") and element.endswith(")"):
                words.append(element[1:-1].split("|")[0])
            elif element.startswith("<") and element.endswith(">"):
                slot = element[1:-1]
                words.append({
                    "KEYWORD": "<keyword>", "DOCID": "<document-id>", "LIMIT": "<n>",
                }[slot])
            else:
                words.append(element)
        return " ".join(words)


def _element_regex(element: str, first: bool) -> str:
    sep = "" if first else r"\s+"
    if element.startswith("(") and element.endswith(")"):
        alternatives = element[1:-1].split("|")
        if len(alternatives) == 1:
            # single alternative: optional literal
            return rf"(?:{sep}{re.escape(alternatives[0])})?" if not first else \
                rf"(?:{re.escape(alternatives[0])}\s+)?"
        joined = "|".join(re.escape(a) for a in alternatives)
        return rf"{sep}(?:{joined})"
    if element.startswith("<") and element.endswith(">"):
        slot = element[1:-1]
        if slot not in _SLOT_REGEX:
            raise ValidationError(f"unknown slot {slot!r} in template")
        return sep + _SLOT_REGEX[slot]
    return sep + re.escape(element)


@dataclass(frozen=True)
class CompiledPattern:
    pattern: NlPattern
    regex: "re.Pattern[str]"

    def try_match(self, question: str) -> Optional[QueryAst]:
        m = self.regex.match(question)
        if m is None:
            return None
        groups = m.groupdict()
        limit = DEFAULT_QUERY_LIMIT
        if groups.get("top_limit"):
            limit = int(groups["top_limit"])
        elif groups.get("limit"):
            limit = int(groups["limit"])
        kind = self.pattern.target
        if kind is QueryKind.KEYWORD_SEARCH:
            return QueryAst(kind=kind, keyword=groups["keyword"].strip().lower(),
                            limit=limit)
        return QueryAst(kind=kind, doc_id=groups["doc_id"].lower(), limit=limit)


DEFAULT_PATTERNS: Tuple[NlPattern, ...] = (
    NlPattern(
        pattern_id="keyword-search",
        template="show (me) all (applications|documents) with (the) keyword <KEYWORD>",
        target=QueryKind.KEYWORD_SEARCH,
    ),
    NlPattern(
        pattern_id="similar-documents",
        template="show (me) (applications|documents) similar to <DOCID>",
        target=QueryKind.SIMILAR_DOCUMENTS,
    ),
    NlPattern(
        pattern_id="list-keywords",
        template="list (the) keywords (of|for) (document) <DOCID>",
        target=QueryKind.LIST_KEYWORDS,
    ),
)


def load_patterns(path: Optional[str] = None) -> Tuple[NlPattern, ...]:
    """Load patterns from a JSON file (list of pattern objects) or defaults."""
    if not path:
        return DEFAULT_PATTERNS
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return tuple(
        NlPattern(pattern_id=p["pattern_id"], template=p["template"],
                  target=QueryKind(p["target"]))
        for p in raw
    )


class QuestionParser:
    def __init__(self, patterns: Sequence[NlPattern] = DEFAULT_PATTERNS) -> None:
        self.patterns = tuple(patterns)
        self._compiled = [p.compile() for p in self.patterns]

    def parse(self, question: str) -> Tuple[str, QueryAst]:
        """Return (pattern_id, ast) of the first matching pattern."""
        if not question or not question.strip():
            raise ValidationError("question must be non-empty")
        normalized = _TRAILING_PUNCT.sub("", question.strip())
        for compiled in self._compiled:
            ast = compiled.try_match(normalized)
            if ast is not None:
                return compiled.pattern.pattern_id, ast
        raise UnparsableQuery(
            f"no pattern matches: {question!r}",
            suggestions=[p.example() for p in self.patterns],
        )


def render_question(ast: QueryAst) -> str:
    """Canonical question for an AST (inverse of parse, used in tests/UI)."""
    if ast.kind is QueryKind.KEYWORD_SEARCH:
        base = f"show me all applications with the keyword {ast.keyword}"
    elif ast.kind is QueryKind.SIMILAR_DOCUMENTS:
        base = f"show me documents similar to {ast.doc_id}"
    else:
        base = f"list the keywords of document {ast.doc_id}"
    if ast.limit != DEFAULT_QUERY_LIMIT:
        base += f" top {ast.limit}"
    return base
