"""FIFO message broker with named queues and at-least-once delivery.

Consumers lease the head message; an unacked lease expires after the queue's
ack timeout and the message is redelivered in place (FIFO position kept).
Messages that exhaust their delivery attempts move to the queue's dead-letter
queue when one is configured, otherwise they are dropped with a logged error.

Queues persist as append-only JSONL logs, compacted on startup, so a broker
restart loses no messages (in-flight leases simply expire and redeliver).
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..errors import (
    DuplicateQueue,
    InvalidName,
    LeaseExpired,
    UnknownDeliveryTag,
    UnknownQueue,
)
from ..model import utc_now
from ..wire import validate_payload

log = logging.getLogger("docukd.msgbus")

QUEUE_NAME_RE = re.compile(r"^[a-z][a-z0-9.-]*$")

#: cross-domain wiring: request/reply pairs inside document processing, the
#: two query-store ingest queues (none for the querying parent), the
#: ontology-learning ingest and the bidirectional ontology exchange.
TOPOLOGY = (
    "q.preprocessing.req",
    "q.preprocessing.res",
    "q.termextraction.req",
    "q.termextraction.res",
    "q.simcomputation.req",
    "q.simcomputation.res",
    "q.searching.ingest",
    "q.nli.ingest",
    "q.ontolearn.ingest",
    "q.ontomgmt.ontologies",
    "q.ontolearn.revised",
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class QueueConfig:
    name: str
    ack_timeout: float = 30.0
    max_attempts: int = 5
    dead_letter_queue: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ack_timeout": self.ack_timeout,
            "max_attempts": self.max_attempts,
            "dead_letter_queue": self.dead_letter_queue,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "QueueConfig":
        return cls(
            name=d["name"],
            ack_timeout=float(d.get("ack_timeout", 30.0)),
            max_attempts=int(d.get("max_attempts", 5)),
            dead_letter_queue=d.get("dead_letter_queue"),
        )


@dataclass(frozen=True)
class MessageEnvelope:
    """Unit of queue traffic, correlated by document (or ontology) id."""

    message_id: str
    queue: str
    correlation_id: str
    payload_type: str
    payload: Any
    attempt: int = 1
    enqueued_at: str = ""
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "message_id": self.message_id,
            "queue": self.queue,
            "correlation_id": self.correlation_id,
            "payload_type": self.payload_type,
            "payload": self.payload,
            "attempt": self.attempt,
            "enqueued_at": self.enqueued_at,
            "schema_version": self.schema_version,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "MessageEnvelope":
        return cls(
            message_id=d["message_id"],
            queue=d["queue"],
            correlation_id=d["correlation_id"],
            payload_type=d["payload_type"],
            payload=d["payload"],
            attempt=int(d.get("attempt", 1)),
            enqueued_at=d.get("enqueued_at", ""),
            schema_version=int(d.get("schema_version", SCHEMA_VERSION)),
        )


def make_envelope(queue: str, correlation_id: str, payload_type: str, payload: Any) -> MessageEnvelope:
    return MessageEnvelope(
        message_id=str(uuid.uuid4()),
        queue=queue,
        correlation_id=correlation_id,
        payload_type=payload_type,
        payload=payload,
        attempt=1,
        enqueued_at=utc_now(),
    )


class _Record:
    __slots__ = ("envelope", "deliveries", "tag")

    def __init__(self, envelope: Dict[str, Any]) -> None:
        self.envelope = envelope
        self.deliveries = 0
        self.tag: Optional[str] = None  # active lease tag, if any


class _Lease:
    __slots__ = ("queue", "message_id", "expires_at")

    def __init__(self, queue: str, message_id: str, expires_at: float) -> None:
        self.queue = queue
        self.message_id = message_id
        self.expires_at = expires_at


class _Queue:
    def __init__(self, config: QueueConfig, log_path: str) -> None:
        self.config = config
        self.log_path = log_path
        self.records: "OrderedDict[str, _Record]" = OrderedDict()


class Broker:
    """In-process broker core; the HTTP service is a thin wrapper."""

    def __init__(self, directory: str) -> None:
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self._lock = threading.Lock()
        self._cv = threading.Condition(self._lock)
        self._queues: Dict[str, _Queue] = {}
        self._leases: Dict[str, _Lease] = {}
        self._expired_tags: Dict[str, float] = {}
        self._recover()

    # ------------------------------------------------------------------
    # persistence

    def _config_path(self) -> str:
        return os.path.join(self.directory, "queues.json")

    def _log_path(self, name: str) -> str:
        return os.path.join(self.directory, f"{name}.log")

    def _save_configs(self) -> None:
        configs = {name: q.config.to_dict() for name, q in self._queues.items()}
        tmp = self._config_path() + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(configs, fh)
        os.replace(tmp, self._config_path())

    def _append(self, queue: _Queue, entry: Dict[str, Any]) -> None:
        with open(queue.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")

    def _recover(self) -> None:
        if not os.path.exists(self._config_path()):
            return
        with open(self._config_path(), "r", encoding="utf-8") as fh:
            configs = json.load(fh)
        for name, cfg in configs.items():
            queue = _Queue(QueueConfig.from_dict(cfg), self._log_path(name))
            self._queues[name] = queue
            if not os.path.exists(queue.log_path):
                continue
            with open(queue.log_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    if entry["op"] == "pub":
                        env = entry["envelope"]
                        queue.records[env["message_id"]] = _Record(env)
                    else:  # ack / dlq / drop all terminate the message here
                        queue.records.pop(entry["id"], None)
            # compaction: rewrite the log with only surviving messages
            tmp = queue.log_path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                for record in queue.records.values():
                    fh.write(json.dumps({"op": "pub", "envelope": record.envelope}) + "\n")
            os.replace(tmp, queue.log_path)

    # ------------------------------------------------------------------
    # operations

    def create_queue(self, config: QueueConfig) -> None:
        if not QUEUE_NAME_RE.match(config.name):
            raise InvalidName(f"queue name {config.name!r} is invalid")
        with self._lock:
            existing = self._queues.get(config.name)
            if existing is not None:
                if existing.config != config:
                    raise DuplicateQueue(f"queue {config.name!r} exists with different config")
                return
            self._queues[config.name] = _Queue(config, self._log_path(config.name))
            self._save_configs()

    def _queue(self, name: str) -> _Queue:
        queue = self._queues.get(name)
        if queue is None:
            raise UnknownQueue(f"no such queue: {name!r}")
        return queue

    def publish(self, queue_name: str, envelope: MessageEnvelope) -> str:
        validate_payload(envelope.payload_type, envelope.payload)
        with self._cv:
            queue = self._queue(queue_name)
            env = envelope.to_dict()
            env["queue"] = queue_name
            queue.records[envelope.message_id] = _Record(env)
            self._append(queue, {"op": "pub", "envelope": env})
            self._cv.notify_all()
            return envelope.message_id

    def consume(
        self, queue_name: str, consumer_id: str, wait: float = 0.0
    ) -> Optional[Tuple[str, MessageEnvelope]]:
        deadline = time.monotonic() + wait
        with self._cv:
            while True:
                queue = self._queue(queue_name)
                self._expire_leases_locked()
                for record in queue.records.values():
                    if record.tag is None:
                        record.deliveries += 1
                        tag = str(uuid.uuid4())
                        record.tag = tag
                        self._leases[tag] = _Lease(
                            queue_name,
                            record.envelope["message_id"],
                            time.monotonic() + queue.config.ack_timeout,
                        )
                        env = dict(record.envelope)
                        env["attempt"] = record.deliveries
                        return tag, MessageEnvelope.from_dict(env)
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return None
                # short slices so expiring leases are noticed promptly
                self._cv.wait(min(remaining, 0.05))

    def _expire_leases_locked(self) -> None:
        now = time.monotonic()
        stale = [tag for tag, lease in self._leases.items() if lease.expires_at <= now]
        for tag in stale:
            lease = self._leases.pop(tag)
            self._expired_tags[tag] = now
            queue = self._queues.get(lease.queue)
            if queue is None:
                continue
            record = queue.records.get(lease.message_id)
            if record is not None and record.tag == tag:
                record.tag = None
                self._maybe_dead_letter_locked(queue, record)
        if len(self._expired_tags) > 10000:
            cutoff = now - 3600
            self._expired_tags = {t: ts for t, ts in self._expired_tags.items() if ts > cutoff}

    def _maybe_dead_letter_locked(self, queue: _Queue, record: _Record) -> None:
        if record.deliveries < queue.config.max_attempts:
            return
        message_id = record.envelope["message_id"]
        del queue.records[message_id]
        dlq_name = queue.config.dead_letter_queue
        if dlq_name:
            dlq = self._queues.get(dlq_name)
            if dlq is None:
                dlq = _Queue(QueueConfig(name=dlq_name), self._log_path(dlq_name))
                self._queues[dlq_name] = dlq
                self._save_configs()
            env = dict(record.envelope)
            env["queue"] = dlq_name
            dlq.records[message_id] = _Record(env)
            self._append(dlq, {"op": "pub", "envelope": env})
            self._append(queue, {"op": "dlq", "id": message_id})
            log.warning("message %s dead-lettered to %s", message_id, dlq_name)
        else:
            self._append(queue, {"op": "drop", "id": message_id})
            log.error(
                "message %s on %s dropped after %d attempts",
                message_id, queue.config.name, record.deliveries,
            )

    def _take_lease(self, tag: str) -> _Lease:
        lease = self._leases.get(tag)
        if lease is None:
            if tag in self._expired_tags:
                raise LeaseExpired(f"lease for tag {tag!r} has expired")
            raise UnknownDeliveryTag(f"no active delivery with tag {tag!r}")
        if lease.expires_at <= time.monotonic():
            self._expire_leases_locked()
            raise LeaseExpired(f"lease for tag {tag!r} has expired")
        return lease

    def ack(self, tag: str) -> None:
        with self._cv:
            lease = self._take_lease(tag)
            del self._leases[tag]
            queue = self._queue(lease.queue)
            record = queue.records.pop(lease.message_id, None)
            if record is not None:
                self._append(queue, {"op": "ack", "id": lease.message_id})
            self._cv.notify_all()

    def nack(self, tag: str) -> None:
        with self._cv:
            lease = self._take_lease(tag)
            del self._leases[tag]
            queue = self._queue(lease.queue)
            record = queue.records.get(lease.message_id)
            if record is not None and record.tag == tag:
                record.tag = None  # stays in place: FIFO position preserved
                self._maybe_dead_letter_locked(queue, record)
            self._cv.notify_all()

    def list_queues(self) -> List[Tuple[str, int, int]]:
        with self._lock:
            self._expire_leases_locked()
            out = []
            for name in sorted(self._queues):
                records = self._queues[name].records
                in_flight = sum(1 for r in records.values() if r.tag is not None)
                out.append((name, len(records), in_flight))
            return out

    def depth(self, queue_name: str) -> int:
        with self._lock:
            return len(self._queue(queue_name).records)


def bootstrap_topology(broker: Broker, ack_timeout: float = 30.0, max_attempts: int = 5) -> None:
    """Create the fixed cross-domain queue wiring (idempotent)."""
    for name in TOPOLOGY:
        broker.create_queue(
            QueueConfig(
                name=name,
                ack_timeout=ack_timeout,
                max_attempts=max_attempts,
                dead_letter_queue=f"{name}.dlq",
            )
        )
