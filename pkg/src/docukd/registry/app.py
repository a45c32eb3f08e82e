"""HTTP surface of the registry service."""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI
from pydantic import BaseModel

from ..httpapi import create_base_app
from .core import DEFAULT_TTL, Registry


class RegisterRequest(BaseModel):
    service_name: str
    base_address: str
    ttl: Optional[float] = None


def create_app(registry: Optional[Registry] = None) -> FastAPI:
    registry = registry or Registry()
    app = create_base_app("registry")
    app.state.registry = registry

    @app.post("/register")
    def register(body: RegisterRequest):
        instance_id = registry.register(
            body.service_name, body.base_address, body.ttl or DEFAULT_TTL
        )
        return {"instance_id": instance_id}

    @app.put("/instances/{service}/{instance_id}/heartbeat")
    def heartbeat(service: str, instance_id: str):
        registry.heartbeat(service, instance_id)
        return {"ok": True}

    @app.get("/resolve/{service}")
    def resolve(service: str):
        return registry.resolve(service).to_dict()

    @app.delete("/instances/{service}/{instance_id}")
    def deregister(service: str, instance_id: str):
        registry.deregister(service, instance_id)
        return {"ok": True}

    @app.get("/instances")
    def instances():
        return [
            {"service_name": name, "healthy": healthy, **record.to_dict()}
            for name, record, healthy in registry.list_instances()
        ]

    return app
