"""HTTP surface of the message bus: queues, publish, long-poll, ack/nack."""

from __future__ import annotations

from typing import Any, Dict, Optional

from fastapi import FastAPI

from ..httpapi import create_base_app
from .broker import Broker, MessageEnvelope, QueueConfig

MAX_POLL_WAIT_MS = 30_000


def create_app(broker: Broker) -> FastAPI:
    app = create_base_app("msgbus")
    app.state.broker = broker

    @app.put("/queues/{name}")
    def create_queue(name: str, body: Dict[str, Any]):
        body = dict(body or {})
        body["name"] = name
        broker.create_queue(QueueConfig.from_dict(body))
        return {"ok": True}

    @app.post("/queues/{name}/messages")
    def publish(name: str, body: Dict[str, Any]):
        message_id = broker.publish(name, MessageEnvelope.from_dict(body))
        return {"message_id": message_id}

    @app.post("/queues/{name}/poll")
    def poll(name: str, consumer: str, wait_ms: int = 0):
        wait = min(max(wait_ms, 0), MAX_POLL_WAIT_MS) / 1000.0
        got = broker.consume(name, consumer, wait=wait)
        if got is None:
            return {"delivery_tag": None, "message": None}
        tag, envelope = got
        return {"delivery_tag": tag, "message": envelope.to_dict()}

    @app.post("/deliveries/{tag}/ack")
    def ack(tag: str):
        broker.ack(tag)
        return {"ok": True}

    @app.post("/deliveries/{tag}/nack")
    def nack(tag: str):
        broker.nack(tag)
        return {"ok": True}

    @app.get("/queues")
    def list_queues():
        return {
            "queues": [
                {"name": name, "depth": depth, "in_flight": in_flight}
                for name, depth, in_flight in broker.list_queues()
            ]
        }

    return app
