"""Shared test scaffolding: an in-process bus facade and notice builders."""

from typing import Any, Optional, Tuple

from docukd.model import (
    CompletionNotice,
    Keyword,
    SimilarityRecord,
    TermExtractionResult,
    new_document_id,
)
from docukd.msgbus.broker import Broker, MessageEnvelope, QueueConfig, make_envelope


class LocalBus:
    """BusClient-compatible facade over an in-process Broker."""

    def __init__(self, broker: Broker) -> None:
        self.broker = broker

    def create_queue(self, name, ack_timeout=30.0, max_attempts=5, dead_letter_queue=None):
        self.broker.create_queue(QueueConfig(
            name=name, ack_timeout=ack_timeout, max_attempts=max_attempts,
            dead_letter_queue=dead_letter_queue,
        ))

    def publish(self, queue: str, correlation_id: str, payload_type: str, payload: Any) -> str:
        envelope = make_envelope(queue, correlation_id, payload_type, payload)
        return self.broker.publish(queue, envelope)

    def poll(self, queue: str, consumer: str, wait_ms: int = 0) -> Optional[Tuple[str, MessageEnvelope]]:
        return self.broker.consume(queue, consumer, wait=wait_ms / 1000.0)

    def ack(self, tag: str) -> None:
        self.broker.ack(tag)

    def nack(self, tag: str) -> None:
        self.broker.nack(tag)

    def queues(self):
        return {
            name: {"depth": depth, "in_flight": in_flight}
            for name, depth, in_flight in self.broker.list_queues()
        }


def keyword(term, score, algorithm="tfidf-v1"):
    return Keyword(term=term, score=score, algorithm=algorithm)


def make_notice(doc_id=None, filename="doc.txt", keywords=(), similarities=()):
    doc_id = doc_id or new_document_id()
    ordered = tuple(sorted(
        (keyword(t, s) for t, s in keywords), key=lambda k: (-k.score, k.term)
    ))
    return CompletionNotice(
        doc_id=doc_id,
        filename=filename,
        keywords=TermExtractionResult(doc_id=doc_id, keywords=ordered,
                                      algorithm="tfidf-v1"),
        similarities=tuple(
            SimilarityRecord(doc_a=doc_id, doc_b=other, score=score,
                             algorithm="cosine-tfidf-v1")
            for other, score in similarities
        ),
    )
