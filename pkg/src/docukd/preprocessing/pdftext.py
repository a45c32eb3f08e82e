"""Minimal PDF text recovery.

Reads text-showing operators (Tj, ', ", TJ) out of the page content streams,
inflating Flate-compressed streams. Good enough for machine-generated PDFs
with a plain text layer; anything without a recoverable text layer is
reported as unextractable rather than OCR'd.
"""

from __future__ import annotations

import base64
import re
import zlib
from typing import List, Optional

from ..errors import ExtractionFailed

_STREAM_RE = re.compile(rb"stream\r?\n(.*?)(?:\r?\n)?endstream", re.DOTALL)


def _decode_stream(raw: bytes) -> bytes:
    """Undo the common filter chains: Flate, ASCII85, ASCII85+Flate."""
    try:
        return zlib.decompress(raw)
    except zlib.error:
        pass
    stripped = raw.strip()
    if stripped.endswith(b"~>"):
        if not stripped.startswith(b"<~"):
            stripped = b"<~" + stripped
        try:
            decoded = base64.a85decode(stripped, adobe=True)
        except ValueError:
            return raw
        try:
            return zlib.decompress(decoded)
        except zlib.error:
            return decoded
    return raw

_OCTAL_MAX = 3


def _decode_pdf_string(raw: bytes) -> str:
    """Decode the body of a (...) string literal (escapes, octal, nesting)."""
    out: List[int] = []
    i = 0
    n = len(raw)
    while i < n:
        c = raw[i]
        if c != 0x5C:  # backslash
            out.append(c)
            i += 1
            continue
        i += 1
        if i >= n:
            break
        e = raw[i]
        simple = {
            ord("n"): ord("\n"), ord("r"): ord("\r"), ord("t"): ord("\t"),
            ord("b"): ord("\b"), ord("f"): ord("\f"),
            ord("("): ord("("), ord(")"): ord(")"), ord("\\"): ord("\\"),
        }
        if e in simple:
            out.append(simple[e])
            i += 1
        elif 0x30 <= e <= 0x37:  # octal escape, up to three digits
            digits = []
            while i < n and len(digits) < _OCTAL_MAX and 0x30 <= raw[i] <= 0x37:
                digits.append(raw[i] - 0x30)
                i += 1
            value = 0
            for d in digits:
                value = value * 8 + d
            out.append(value & 0xFF)
        elif e in (0x0A, 0x0D):  # line continuation
            i += 1
            if e == 0x0D and i < n and raw[i] == 0x0A:
                i += 1
        else:
            out.append(e)
            i += 1
    return bytes(out).decode("latin-1")


def _read_string(data: bytes, start: int) -> (str, int):
    """Read a (...) literal starting at the '(' and return (text, next index)."""
    depth = 0
    i = start
    n = len(data)
    body_start = start + 1
    while i < n:
        c = data[i]
        if c == 0x5C:
            i += 2
            continue
        if c == 0x28:  # (
            depth += 1
        elif c == 0x29:  # )
            depth -= 1
            if depth == 0:
                return _decode_pdf_string(data[body_start:i]), i + 1
        i += 1
    return _decode_pdf_string(data[body_start:]), n


def _read_hex_string(data: bytes, start: int) -> (str, int):
    end = data.find(b">", start)
    if end == -1:
        end = len(data)
    hexdigits = re.sub(rb"[^0-9a-fA-F]", b"", data[start + 1:end])
    if len(hexdigits) % 2:
        hexdigits += b"0"
    return bytes.fromhex(hexdigits.decode("ascii")).decode("latin-1"), end + 1


_OP_RE = re.compile(rb"[A-Za-z'\"*]+")


def _extract_from_stream(data: bytes) -> str:
    """Walk one content stream, collecting shown text in order."""
    parts: List[str] = []
    pending: List[str] = []  # strings seen since the last operator
    i = 0
    n = len(data)
    while i < n:
        c = data[i]
        if c == 0x28:  # ( string
            text, i = _read_string(data, i)
            pending.append(text)
        elif c == 0x3C and not data.startswith(b"<<", i):  # < hex string
            text, i = _read_hex_string(data, i)
            pending.append(text)
        elif c == 0x25:  # % comment to end of line
            eol = data.find(b"\n", i)
            i = n if eol == -1 else eol + 1
        else:
            m = _OP_RE.match(data, i)
            if m:
                op = m.group(0)
                if op in (b"Tj", b"TJ", b"'", b'"'):
                    parts.extend(pending)
                elif op in (b"Td", b"TD", b"T*", b"ET"):
                    if parts and parts[-1] != "\n":
                        parts.append("\n")
                pending = []
                i = m.end()
            else:
                i += 1
    return "".join(parts)


def extract_pdf_text(content: bytes) -> str:
    """Recover the text layer of a PDF; raises when the data is not a PDF."""
    if not content.startswith(b"%PDF-"):
        raise ExtractionFailed("not a PDF document")
    chunks: List[str] = []
    for match in _STREAM_RE.finditer(content):
        data = _decode_stream(match.group(1))
        text = _extract_from_stream(data)
        if text.strip():
            chunks.append(text)
    return "\n".join(chunks)
