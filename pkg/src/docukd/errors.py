"""Error types shared across services.

Every service-level failure maps to one of these exceptions; the HTTP layer
renders them as ``{"error": code, "message": ...}`` with the class's status.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class DocukdError(Exception):
    """Base class for all service errors."""

    code = "InternalError"
    http_status = 500

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        body = {"error": self.code, "message": self.message}
        if self.details:
            body.update(self.details)
        return body


def error_for_code(code: str, message: str, status: int, **details: Any) -> DocukdError:
    """Rebuild a typed error from a wire response (client side)."""
    cls = _BY_CODE.get(code)
    if cls is None:
        err = DocukdError(message, **details)
        err.http_status = status
        return err
    return cls(message, **details)


# --- message bus ---

class DuplicateQueue(DocukdError):
    code = "DuplicateQueue"
    http_status = 409


class InvalidName(DocukdError):
    code = "InvalidName"
    http_status = 400


class UnknownQueue(DocukdError):
    code = "UnknownQueue"
    http_status = 404


class PayloadSchemaMismatch(DocukdError):
    code = "PayloadSchemaMismatch"
    http_status = 400


class UnknownDeliveryTag(DocukdError):
    code = "UnknownDeliveryTag"
    http_status = 404


class LeaseExpired(DocukdError):
    code = "LeaseExpired"
    http_status = 409


# --- registry ---

class InvalidAddress(DocukdError):
    code = "InvalidAddress"
    http_status = 400


class UnknownInstance(DocukdError):
    code = "UnknownInstance"
    http_status = 404


class NoHealthyInstance(DocukdError):
    code = "NoHealthyInstance"
    http_status = 503


# --- gateway ---

class NoRoute(DocukdError):
    code = "NoRoute"
    http_status = 404


class UpstreamUnreachable(DocukdError):
    code = "UpstreamUnreachable"
    http_status = 502


class InvalidRouteConfig(DocukdError):
    code = "InvalidRouteConfig"
    http_status = 400


# --- document pipeline ---

class UnsupportedMediaType(DocukdError):
    code = "UnsupportedMediaType"
    http_status = 415


class EmptyDocument(DocukdError):
    code = "EmptyDocument"
    http_status = 400


class DocumentTooLarge(DocukdError):
    code = "DocumentTooLarge"
    http_status = 413


class StorageFailure(DocukdError):
    code = "StorageFailure"
    http_status = 500


class UnknownDocument(DocukdError):
    code = "UnknownDocument"
    http_status = 404


class StaleReply(DocukdError):
    code = "StaleReply"
    http_status = 409


class NoPriorResult(DocukdError):
    code = "NoPriorResult"
    http_status = 404


class NotFailed(DocukdError):
    code = "NotFailed"
    http_status = 409


class UnsupportedFormat(DocukdError):
    code = "UnsupportedFormat"
    http_status = 415


class ExtractionFailed(DocukdError):
    code = "ExtractionFailed"
    http_status = 422


class EmptyText(DocukdError):
    code = "EmptyText"
    http_status = 422


class NoTokens(DocukdError):
    code = "NoTokens"
    http_status = 422


# --- querying ---

class ValidationError(DocukdError):
    code = "ValidationError"
    http_status = 400


class SearchingUnavailable(DocukdError):
    code = "SearchingUnavailable"
    http_status = 503


class NliUnavailable(DocukdError):
    code = "NliUnavailable"
    http_status = 503


class UnparsableQuery(DocukdError):
    code = "UnparsableQuery"
    http_status = 400

    def __init__(self, message: str = "", suggestions: Optional[list] = None, **details: Any) -> None:
        super().__init__(message, suggestions=list(suggestions or []), **details)


class StoreUnavailable(DocukdError):
    code = "StoreUnavailable"
    http_status = 503


# --- ontologies ---

class ValidationFailed(DocukdError):
    code = "ValidationFailed"
    http_status = 422


class CyclicHierarchy(DocukdError):
    code = "CyclicHierarchy"
    http_status = 422


class NoOntology(DocukdError):
    code = "NoOntology"
    http_status = 404


class UnknownClass(DocukdError):
    code = "UnknownClass"
    http_status = 404


class CycleRejected(DocukdError):
    code = "CycleRejected"
    http_status = 409


class DuplicateClass(DocukdError):
    code = "DuplicateClass"
    http_status = 409


# --- harness ---

class PortInUse(DocukdError):
    code = "PortInUse"
    http_status = 409


class ServiceFailedToStart(DocukdError):
    code = "ServiceFailedToStart"
    http_status = 500


class GatewayUnreachable(DocukdError):
    code = "GatewayUnreachable"
    http_status = 503


class UnknownService(DocukdError):
    code = "UnknownService"
    http_status = 404


def _collect() -> Dict[str, type]:
    table: Dict[str, type] = {}
    for obj in list(globals().values()):
        if isinstance(obj, type) and issubclass(obj, DocukdError):
            table[obj.code] = obj
    return table


_BY_CODE = _collect()
