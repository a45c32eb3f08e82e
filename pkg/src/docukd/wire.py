"""Published JSON schemas and payload validation for queue traffic."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any, List

import jsonschema

from .errors import PayloadSchemaMismatch


def schema_names() -> List[str]:
    files = resources.files("docukd.schemas")
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


@lru_cache(maxsize=None)
def load_schema(name: str) -> Any:
    path = resources.files("docukd.schemas").joinpath(f"{name}.json")
    if not path.is_file():
        raise KeyError(name)
    return json.loads(path.read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def _validator(name: str) -> jsonschema.Validator:
    return jsonschema.Draft202012Validator(load_schema(name))


def validate_payload(payload_type: str, payload: Any) -> None:
    """Check a payload against the schema named by its payload_type."""
    try:
        validator = _validator(payload_type)
    except KeyError:
        raise PayloadSchemaMismatch(f"unknown payload type: {payload_type!r}") from None
    errors = sorted(validator.iter_errors(payload), key=str)
    if errors:
        first = errors[0]
        raise PayloadSchemaMismatch(
            f"payload does not match schema {payload_type!r}: {first.message}"
        )
