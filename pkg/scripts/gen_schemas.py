#!/usr/bin/env python3
"""Regenerate the published JSON schemas (package data + docs copies)."""

import json
import os

UUID_PATTERN = "^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$"

DOC_ID = {"type": "string", "pattern": UUID_PATTERN}
NONNEG_NUMBER = {"type": "number", "minimum": 0}
NONNEG_INT = {"type": "integer", "minimum": 0}
POS_INT = {"type": "integer", "minimum": 1}
STRING = {"type": "string"}
NONEMPTY_STRING = {"type": "string", "minLength": 1}
BOOL = {"type": "boolean"}

STATES = [
    "Received", "Preprocessing", "Preprocessed", "ExtractingTerms",
    "TermsExtracted", "ComputingSimilarity", "Completed", "Failed",
]
STEPS = ["Preprocess", "TermExtract", "SimCompute"]
PROVENANCE = ["learned", "inferred", "manual"]


def obj(props, required=None, additional=True):
    schema = {"type": "object", "properties": props}
    if required:
        schema["required"] = required
    if not additional:
        schema["additionalProperties"] = False
    return schema


def arr(items):
    return {"type": "array", "items": items}


def nullable(schema):
    return {"anyOf": [schema, {"type": "null"}]}


KEYWORD = obj(
    {"term": NONEMPTY_STRING, "score": NONNEG_NUMBER, "algorithm": NONEMPTY_STRING},
    required=["term", "score", "algorithm"],
)

DOCUMENT_STATUS = obj(
    {
        "state": {"enum": STATES},
        "failed_step": nullable({"enum": STEPS}),
        "reason": nullable(STRING),
        "attempts": {"type": "object", "additionalProperties": NONNEG_INT},
    },
    required=["state"],
)

TERM_EXTRACTION_RESULT = obj(
    {"doc_id": DOC_ID, "keywords": arr(KEYWORD), "algorithm": NONEMPTY_STRING},
    required=["doc_id", "keywords", "algorithm"],
)

SIMILARITY_RECORD = obj(
    {
        "doc_a": DOC_ID,
        "doc_b": DOC_ID,
        "score": {"type": "number", "minimum": 0, "maximum": 1},
        "algorithm": NONEMPTY_STRING,
    },
    required=["doc_a", "doc_b", "score", "algorithm"],
)

EXTRACTED_TEXT = obj(
    {"doc_id": DOC_ID, "text": STRING, "extractor": NONEMPTY_STRING},
    required=["doc_id", "text", "extractor"],
)

ONTOLOGY_CLASS = obj(
    {
        "iri": NONEMPTY_STRING,
        "label": NONEMPTY_STRING,
        "synonyms": arr(STRING),
        "support": arr(STRING),
        "provenance": {"enum": PROVENANCE},
    },
    required=["iri", "label"],
)

AXIOM = {
    "type": "array",
    "prefixItems": [NONEMPTY_STRING, NONEMPTY_STRING, {"enum": PROVENANCE}],
    "minItems": 3,
    "maxItems": 3,
}

SCHEMAS = {
    "DocumentId": DOC_ID,
    "DocumentStatus": DOCUMENT_STATUS,
    "DocumentRecord": obj(
        {
            "doc_id": DOC_ID,
            "filename": NONEMPTY_STRING,
            "media_type": NONEMPTY_STRING,
            "content": {"type": "string", "contentEncoding": "base64"},
            "uploaded_at": NONEMPTY_STRING,
            "status": DOCUMENT_STATUS,
        },
        required=["doc_id", "filename", "media_type", "content", "uploaded_at", "status"],
    ),
    "ExtractedText": EXTRACTED_TEXT,
    "Keyword": KEYWORD,
    "TermExtractionResult": TERM_EXTRACTION_RESULT,
    "SimilarityRecord": SIMILARITY_RECORD,
    "QueryAst": obj(
        {
            "kind": {"enum": ["KeywordSearch", "SimilarDocuments", "ListKeywords"]},
            "keyword": nullable(STRING),
            "doc_id": nullable(DOC_ID),
            "limit": POS_INT,
        },
        required=["kind"],
    ),
    "QueryResult": obj(
        {
            "query_kind": NONEMPTY_STRING,
            "columns": arr(STRING),
            "rows": arr(arr({"type": ["string", "number", "null"]})),
            "data_version": NONNEG_INT,
        },
        required=["query_kind", "columns", "rows", "data_version"],
    ),
    "MessageEnvelope": obj(
        {
            "message_id": {"type": "string", "pattern": UUID_PATTERN},
            "queue": NONEMPTY_STRING,
            "correlation_id": NONEMPTY_STRING,
            "payload_type": NONEMPTY_STRING,
            "payload": {},
            "attempt": POS_INT,
            "enqueued_at": NONEMPTY_STRING,
            "schema_version": {"const": 1},
        },
        required=[
            "message_id", "queue", "correlation_id", "payload_type",
            "payload", "attempt", "enqueued_at", "schema_version",
        ],
    ),
    "QueueConfig": obj(
        {
            "name": {"type": "string", "pattern": "^[a-z][a-z0-9.-]*$"},
            "ack_timeout": {"type": "number", "exclusiveMinimum": 0},
            "max_attempts": POS_INT,
            "dead_letter_queue": nullable(STRING),
        },
        required=["name"],
    ),
    "ServiceRecord": obj(
        {
            "service_name": NONEMPTY_STRING,
            "instance_id": {"type": "string", "pattern": UUID_PATTERN},
            "base_address": NONEMPTY_STRING,
            "registered_at": NONEMPTY_STRING,
            "last_heartbeat": NONEMPTY_STRING,
            "ttl": {"type": "number", "exclusiveMinimum": 0},
        },
        required=["service_name", "instance_id", "base_address"],
    ),
    "RouteRule": obj(
        {
            "public_prefix": NONEMPTY_STRING,
            "target_service": NONEMPTY_STRING,
            "strip_prefix": BOOL,
            "methods": arr({"enum": ["GET", "POST", "PUT", "DELETE"]}),
        },
        required=["public_prefix", "target_service", "methods"],
    ),
    "PipelineStepRequest": obj(
        {
            "doc_id": DOC_ID,
            "step": {"enum": STEPS},
            "input_payload": {"type": "object"},
        },
        required=["doc_id", "step", "input_payload"],
    ),
    "StepReply": obj(
        {
            "doc_id": DOC_ID,
            "step": {"enum": STEPS},
            "ok": BOOL,
            "output": nullable({"type": "object"}),
            "error": nullable(STRING),
        },
        required=["doc_id", "step", "ok"],
    ),
    "CompletionNotice": obj(
        {
            "doc_id": DOC_ID,
            "filename": NONEMPTY_STRING,
            "keywords": TERM_EXTRACTION_RESULT,
            "similarities": arr(SIMILARITY_RECORD),
            "extracted_text_ref": BOOL,
        },
        required=["doc_id", "filename", "keywords", "similarities"],
    ),
    "OntolearnIngest": obj(
        {
            "term_extraction": TERM_EXTRACTION_RESULT,
            "extracted_text": EXTRACTED_TEXT,
        },
        required=["term_extraction", "extracted_text"],
    ),
    "Ontology": obj(
        {
            "ontology_iri": NONEMPTY_STRING,
            "classes": arr(ONTOLOGY_CLASS),
            "subclass_axioms": arr(AXIOM),
            "related_axioms": arr(AXIOM),
            "version": NONNEG_INT,
            "revised_manually": BOOL,
        },
        required=["ontology_iri", "classes", "subclass_axioms", "related_axioms", "version"],
    ),
    "VisualizationGraph": obj(
        {
            "nodes": arr(obj(
                {"id": NONEMPTY_STRING, "label": NONEMPTY_STRING, "type": NONEMPTY_STRING},
                required=["id", "label", "type"],
            )),
            "edges": arr(obj(
                {
                    "from": NONEMPTY_STRING,
                    "to": NONEMPTY_STRING,
                    "label": NONEMPTY_STRING,
                    "inferred": BOOL,
                },
                required=["from", "to", "label", "inferred"],
            )),
        },
        required=["nodes", "edges"],
    ),
    # permissive type for ad-hoc/benchmark traffic
    "RawPayload": {},
}


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    targets = [
        os.path.join(root, "src", "docukd", "schemas"),
        os.path.join(root, "docs", "schemas"),
    ]
    for target in targets:
        os.makedirs(target, exist_ok=True)
        for name, schema in SCHEMAS.items():
            body = {"$schema": "https://json-schema.org/draft/2020-12/schema", "title": name}
            body.update(schema if isinstance(schema, dict) else {})
            with open(os.path.join(target, f"{name}.json"), "w", encoding="utf-8") as fh:
                json.dump(body, fh, indent=2, sort_keys=True)
                fh.write("\n")
    print(f"wrote {len(SCHEMAS)} schemas to {', '.join(targets)}")


if __name__ == "__main__":
    main()
