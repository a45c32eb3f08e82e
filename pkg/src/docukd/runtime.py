"""Process scaffolding shared by every service.

A service is a FastAPI app plus optional queue consumers. The runtime serves
the app with uvicorn, waits until the local port answers, registers with the
registry, heartbeats at ttl/3, and runs one consumer thread per subscribed
queue. Logs go to stdout as line-delimited JSON; the harness redirects them
to per-service files.
"""

from __future__ import annotations

import json
import logging
import socket
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import requests
import uvicorn
from fastapi import FastAPI

from .clients import BusClient, Heartbeater, RegistryClient
from .errors import DocukdError
from .msgbus.broker import MessageEnvelope


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            entry["exc"] = self.formatException(record.exc_info)
        return json.dumps(entry)


def setup_json_logging(level: int = logging.INFO) -> None:
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


class QueueConsumer(threading.Thread):
    """Long-polls one queue and feeds messages to a handler.

    The handler must be idempotent: a raised exception nacks the delivery and
    the bus redelivers it (at-least-once).
    """

    def __init__(self, bus: BusClient, queue: str, consumer_id: str,
                 handler: Callable[[MessageEnvelope], None],
                 poll_wait_ms: int = 2000) -> None:
        super().__init__(name=f"consume-{queue}", daemon=True)
        self.bus = bus
        self.queue = queue
        self.consumer_id = consumer_id
        self.handler = handler
        self.poll_wait_ms = poll_wait_ms
        self._stop = threading.Event()
        self.log = logging.getLogger(f"docukd.consumer.{queue}")

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                got = self.bus.poll(self.queue, self.consumer_id, wait_ms=self.poll_wait_ms)
            except (DocukdError, requests.RequestException) as exc:
                self.log.warning("poll failed: %s", exc)
                self._stop.wait(0.5)
                continue
            if got is None:
                continue
            tag, envelope = got
            try:
                self.handler(envelope)
            except Exception:
                self.log.exception("handler failed for %s", envelope.message_id)
                self._try(self.bus.nack, tag)
                continue
            self._try(self.bus.ack, tag)

    def _try(self, fn: Callable[[str], None], tag: str) -> None:
        try:
            fn(tag)
        except (DocukdError, requests.RequestException) as exc:
            self.log.warning("ack/nack failed for %s: %s", tag, exc)

    def stop(self) -> None:
        self._stop.set()


@dataclass
class Subscription:
    queue: str
    handler: Callable[[MessageEnvelope], None]


def wait_for_http(url: str, timeout: float = 15.0, interval: float = 0.05) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            if requests.get(url, timeout=1.0).status_code == 200:
                return True
        except requests.RequestException:
            pass
        time.sleep(interval)
    return False


class ServiceRuntime:
    """Serves one app, keeps it registered, runs its queue consumers."""

    def __init__(
        self,
        service_name: str,
        app: FastAPI,
        port: int,
        registry_url: Optional[str] = None,
        subscriptions: Sequence[Subscription] = (),
        bus: Optional[BusClient] = None,
        ttl: float = 10.0,
        register: bool = True,
        on_ready: Optional[Callable[[], None]] = None,
    ) -> None:
        self.service_name = service_name
        self.app = app
        self.port = port
        self.registry_url = registry_url
        self.subscriptions = list(subscriptions)
        self.bus = bus
        self.ttl = ttl
        self.register = register
        self.on_ready = on_ready
        self.base_address = f"http://127.0.0.1:{port}"
        self._heartbeater: Optional[Heartbeater] = None
        self._consumers: List[QueueConsumer] = []
        self.log = logging.getLogger(f"docukd.{service_name}")

    def _boot_background(self) -> None:
        if not wait_for_http(f"{self.base_address}/health"):
            self.log.error("service did not become ready on %s", self.base_address)
            return
        if self.register and self.registry_url:
            client = RegistryClient(self.registry_url)
            self._heartbeater = Heartbeater(
                client, self.service_name, self.base_address, ttl=self.ttl
            )
            self._heartbeater.start()
        for sub in self.subscriptions:
            consumer = QueueConsumer(
                self.bus, sub.queue, consumer_id=self.service_name, handler=sub.handler
            )
            consumer.start()
            self._consumers.append(consumer)
        if self.on_ready is not None:
            self.on_ready()
        self.log.info("%s ready on %s", self.service_name, self.base_address)

    def shutdown(self) -> None:
        for consumer in self._consumers:
            consumer.stop()
        if self._heartbeater is not None:
            self._heartbeater.stop()

    def serve(self) -> None:
        self.app.add_event_handler("shutdown", self.shutdown)
        threading.Thread(target=self._boot_background, daemon=True).start()
        uvicorn.run(
            self.app,
            host="127.0.0.1",
            port=self.port,
            log_level="warning",
            access_log=False,
        )
