"""HTTP clients for the infrastructure services (registry, message bus).

All inter-service addressing goes through the registry: a service receives
only REGISTRY_URL and resolves everything else, including the bus.
"""

from __future__ import annotations

import threading
import time
from typing import Any, Callable, Dict, Optional, Tuple

import requests

from .errors import DocukdError, NoHealthyInstance, error_for_code
from .msgbus.broker import MessageEnvelope, make_envelope

DEFAULT_TIMEOUT = 10.0


def raise_for_error(response: requests.Response) -> None:
    if response.status_code < 400:
        return
    try:
        body = response.json()
    except ValueError:
        body = {}
    raise error_for_code(
        body.get("error", "InternalError"),
        body.get("message", response.text[:200]),
        response.status_code,
    )


class RegistryClient:
    def __init__(self, registry_url: str, session: Optional[requests.Session] = None) -> None:
        self.registry_url = registry_url.rstrip("/")
        self._session = session or requests.Session()

    def register(self, service_name: str, base_address: str, ttl: float = 10.0) -> str:
        resp = self._session.post(
            f"{self.registry_url}/register",
            json={"service_name": service_name, "base_address": base_address, "ttl": ttl},
            timeout=DEFAULT_TIMEOUT,
        )
        raise_for_error(resp)
        return resp.json()["instance_id"]

    def heartbeat(self, service_name: str, instance_id: str) -> None:
        resp = self._session.put(
            f"{self.registry_url}/instances/{service_name}/{instance_id}/heartbeat",
            timeout=DEFAULT_TIMEOUT,
        )
        raise_for_error(resp)

    def resolve(self, service_name: str) -> Dict[str, Any]:
        resp = self._session.get(
            f"{self.registry_url}/resolve/{service_name}", timeout=DEFAULT_TIMEOUT
        )
        raise_for_error(resp)
        return resp.json()

    def resolve_address(self, service_name: str) -> str:
        return self.resolve(service_name)["base_address"]

    def deregister(self, service_name: str, instance_id: str) -> None:
        resp = self._session.delete(
            f"{self.registry_url}/instances/{service_name}/{instance_id}",
            timeout=DEFAULT_TIMEOUT,
        )
        raise_for_error(resp)


class Heartbeater(threading.Thread):
    """Registers a service and keeps it healthy; re-registers after registry
    restarts (heartbeat rejections) or transient registry outages."""

    def __init__(self, client: RegistryClient, service_name: str, base_address: str,
                 ttl: float = 10.0) -> None:
        super().__init__(name=f"heartbeat-{service_name}", daemon=True)
        self.client = client
        self.service_name = service_name
        self.base_address = base_address
        self.ttl = ttl
        self.instance_id: Optional[str] = None
        self._stop = threading.Event()

    def run(self) -> None:
        interval = self.ttl / 3.0
        while not self._stop.is_set():
            try:
                if self.instance_id is None:
                    self.instance_id = self.client.register(
                        self.service_name, self.base_address, self.ttl
                    )
                else:
                    self.client.heartbeat(self.service_name, self.instance_id)
            except DocukdError:
                self.instance_id = None  # stale: re-register next round
            except requests.RequestException:
                pass  # registry unreachable: retry next round
            self._stop.wait(interval)

    def stop(self) -> None:
        self._stop.set()
        if self.instance_id is not None:
            try:
                self.client.deregister(self.service_name, self.instance_id)
            except (DocukdError, requests.RequestException):
                pass


class BusClient:
    """Client for the message bus; the bus address comes from a provider so
    callers can hand in either a fixed URL or a registry lookup."""

    def __init__(self, address_provider: Callable[[], str],
                 session: Optional[requests.Session] = None) -> None:
        self._provider = address_provider
        self._session = session or requests.Session()
        self._cached: Optional[str] = None
        self._cached_at = 0.0

    @classmethod
    def fixed(cls, base_url: str) -> "BusClient":
        return cls(lambda: base_url)

    @classmethod
    def via_registry(cls, registry: RegistryClient) -> "BusClient":
        return cls(lambda: registry.resolve_address("msgbus"))

    def _base(self, fresh: bool = False) -> str:
        if fresh or self._cached is None or time.monotonic() - self._cached_at > 5.0:
            self._cached = self._provider().rstrip("/")
            self._cached_at = time.monotonic()
        return self._cached

    def _request(self, method: str, path: str, **kwargs: Any) -> requests.Response:
        try:
            resp = self._session.request(method, self._base() + path, **kwargs)
        except requests.RequestException:
            # one retry with a fresh address (the bus may have moved)
            resp = self._session.request(method, self._base(fresh=True) + path, **kwargs)
        raise_for_error(resp)
        return resp

    def create_queue(self, name: str, ack_timeout: float = 30.0, max_attempts: int = 5,
                     dead_letter_queue: Optional[str] = None) -> None:
        self._request(
            "PUT", f"/queues/{name}",
            json={
                "name": name,
                "ack_timeout": ack_timeout,
                "max_attempts": max_attempts,
                "dead_letter_queue": dead_letter_queue,
            },
            timeout=DEFAULT_TIMEOUT,
        )

    def publish(self, queue: str, correlation_id: str, payload_type: str, payload: Any) -> str:
        envelope = make_envelope(queue, correlation_id, payload_type, payload)
        self._request(
            "POST", f"/queues/{queue}/messages",
            json=envelope.to_dict(), timeout=DEFAULT_TIMEOUT,
        )
        return envelope.message_id

    def poll(self, queue: str, consumer: str,
             wait_ms: int = 0) -> Optional[Tuple[str, MessageEnvelope]]:
        resp = self._request(
            "POST", f"/queues/{queue}/poll",
            params={"consumer": consumer, "wait_ms": wait_ms},
            timeout=DEFAULT_TIMEOUT + wait_ms / 1000.0,
        )
        body = resp.json()
        if body.get("message") is None:
            return None
        return body["delivery_tag"], MessageEnvelope.from_dict(body["message"])

    def ack(self, tag: str) -> None:
        self._request("POST", f"/deliveries/{tag}/ack", timeout=DEFAULT_TIMEOUT)

    def nack(self, tag: str) -> None:
        self._request("POST", f"/deliveries/{tag}/nack", timeout=DEFAULT_TIMEOUT)

    def queues(self) -> Dict[str, Dict[str, int]]:
        resp = self._request("GET", "/queues", timeout=DEFAULT_TIMEOUT)
        return {
            q["name"]: {"depth": q["depth"], "in_flight": q["in_flight"]}
            for q in resp.json()["queues"]
        }
