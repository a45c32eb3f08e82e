"""Instance registry: services announce themselves, callers resolve one.

Instances stay healthy as long as heartbeats arrive within their ttl; expired
instances are purged lazily on resolve and by a periodic sweep. State is
in-memory only: after a registry restart, clients re-register when their next
heartbeat is rejected.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple
from urllib.parse import urlparse

from ..errors import InvalidAddress, NoHealthyInstance, UnknownInstance
from ..model import utc_now

DEFAULT_TTL = 10.0


@dataclass
class ServiceRecord:
    service_name: str
    instance_id: str
    base_address: str
    registered_at: str
    last_heartbeat: str
    ttl: float

    def to_dict(self) -> dict:
        return {
            "service_name": self.service_name,
            "instance_id": self.instance_id,
            "base_address": self.base_address,
            "registered_at": self.registered_at,
            "last_heartbeat": self.last_heartbeat,
            "ttl": self.ttl,
        }


class _Instance:
    __slots__ = ("record", "mono_heartbeat")

    def __init__(self, record: ServiceRecord, mono_heartbeat: float) -> None:
        self.record = record
        self.mono_heartbeat = mono_heartbeat


class Registry:
    """Thread-safe in-memory registry with round-robin resolution."""

    def __init__(self, clock: Callable[[], float] = time.monotonic) -> None:
        self._clock = clock
        self._lock = threading.Lock()
        self._instances: Dict[str, List[_Instance]] = {}
        self._rr_counters: Dict[str, int] = {}

    def register(self, service_name: str, base_address: str, ttl: float = DEFAULT_TTL) -> str:
        parsed = urlparse(base_address)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise InvalidAddress(f"not a valid base address: {base_address!r}")
        if ttl <= 0:
            raise InvalidAddress(f"ttl must be positive: {ttl}")
        instance_id = str(uuid.uuid4())
        now = utc_now()
        record = ServiceRecord(
            service_name=service_name,
            instance_id=instance_id,
            base_address=base_address.rstrip("/"),
            registered_at=now,
            last_heartbeat=now,
            ttl=ttl,
        )
        with self._lock:
            self._instances.setdefault(service_name, []).append(
                _Instance(record, self._clock())
            )
        return instance_id

    def _find(self, service_name: str, instance_id: str) -> _Instance:
        for inst in self._instances.get(service_name, ()):
            if inst.record.instance_id == instance_id:
                return inst
        raise UnknownInstance(f"{service_name}/{instance_id} is not registered")

    def heartbeat(self, service_name: str, instance_id: str) -> None:
        with self._lock:
            inst = self._find(service_name, instance_id)
            inst.mono_heartbeat = self._clock()
            inst.record.last_heartbeat = utc_now()

    def deregister(self, service_name: str, instance_id: str) -> None:
        with self._lock:
            inst = self._find(service_name, instance_id)
            self._instances[service_name].remove(inst)

    def _purge_locked(self, service_name: str) -> List[_Instance]:
        now = self._clock()
        alive = [
            inst for inst in self._instances.get(service_name, [])
            if now - inst.mono_heartbeat <= inst.record.ttl
        ]
        self._instances[service_name] = alive
        return alive

    def resolve(self, service_name: str) -> ServiceRecord:
        with self._lock:
            healthy = self._purge_locked(service_name)
            if not healthy:
                raise NoHealthyInstance(f"no healthy instance of {service_name!r}")
            counter = self._rr_counters.get(service_name, 0)
            self._rr_counters[service_name] = counter + 1
            return healthy[counter % len(healthy)].record

    def purge_expired(self) -> None:
        with self._lock:
            for name in list(self._instances):
                self._purge_locked(name)

    def list_instances(self) -> List[Tuple[str, ServiceRecord, bool]]:
        with self._lock:
            now = self._clock()
            out = []
            for name in sorted(self._instances):
                for inst in self._instances[name]:
                    healthy = now - inst.mono_heartbeat <= inst.record.ttl
                    out.append((name, inst.record, healthy))
            return out
