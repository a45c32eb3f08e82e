"""Text extraction plugins and whitespace normalization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List

from ..errors import EmptyText, ExtractionFailed, UnsupportedFormat
from ..model import DocumentRecord, ExtractedText
from .pdftext import extract_pdf_text

_PARAGRAPH_BREAK = re.compile(r"\n[ \t\r\f\v]*\n\s*")


def normalize_text(raw: str) -> str:
    """Collapse whitespace runs to single spaces, keep paragraph breaks as '\\n'."""
    raw = raw.lstrip("﻿").replace("\x00", "")
    paragraphs = _PARAGRAPH_BREAK.split(raw)
    cleaned = [" ".join(p.split()) for p in paragraphs]
    return "\n".join(p for p in cleaned if p)


class ExtractorPlugin:
    """One plugin converts one family of media types to plain text."""

    name: str = ""
    accepts: FrozenSet[str] = frozenset()

    def extract(self, record: DocumentRecord) -> str:
        raise NotImplementedError


class PlainTextExtractor(ExtractorPlugin):
    name = "plain-text-v1"
    accepts = frozenset({"text/plain"})

    def extract(self, record: DocumentRecord) -> str:
        # lossy decode: stray bytes must not fail the pipeline
        return record.content.decode("utf-8", errors="replace")


class PdfTextExtractor(ExtractorPlugin):
    name = "pdf-mini-v1"
    accepts = frozenset({"application/pdf"})

    def extract(self, record: DocumentRecord) -> str:
        return extract_pdf_text(record.content)


class ExtractorRegistry:
    def __init__(self, plugins: List[ExtractorPlugin]) -> None:
        self._by_type: Dict[str, ExtractorPlugin] = {}
        for plugin in plugins:
            for media_type in plugin.accepts:
                if media_type in self._by_type:
                    raise ExtractionFailed(
                        f"media type {media_type!r} claimed by two plugins"
                    )
                self._by_type[media_type] = plugin

    @property
    def accepted_types(self) -> FrozenSet[str]:
        return frozenset(self._by_type)

    def extract(self, record: DocumentRecord) -> ExtractedText:
        plugin = self._by_type.get(record.media_type)
        if plugin is None:
            raise UnsupportedFormat(f"no extractor for {record.media_type!r}")
        text = normalize_text(plugin.extract(record))
        if not text:
            raise EmptyText("empty extraction")
        return ExtractedText(doc_id=record.doc_id, text=text, extractor=plugin.name)


def default_registry() -> ExtractorRegistry:
    return ExtractorRegistry([PlainTextExtractor(), PdfTextExtractor()])
