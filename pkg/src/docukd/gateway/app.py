"""Gateway: the only door for external clients.

Routes public prefixes to healthy service instances via the registry and
hides everything else; no path under /internal is ever forwarded, whatever
the route table says. Proxying is content-transparent and stamps exactly one
X-Request-Id on the upstream request.
"""

from __future__ import annotations

import mimetypes
import os
import uuid
from typing import Optional

import requests
from fastapi import FastAPI, Request, Response

from ..clients import RegistryClient
from ..errors import NoHealthyInstance, NoRoute, UpstreamUnreachable
from ..httpapi import create_base_app
from .routes import RouteTable

UPSTREAM_TIMEOUT = 5.0
MAX_BODY_BYTES = 50 * 1024 * 1024

# connection-level headers never relayed in either direction
_HOP_HEADERS = {
    "host", "content-length", "connection", "keep-alive", "transfer-encoding",
    "te", "upgrade", "proxy-authenticate", "proxy-authorization", "trailers",
}


def create_app(
    registry: RegistryClient,
    routes: Optional[RouteTable] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = create_base_app("gateway")
    app.state.routes = routes or RouteTable.default()
    app.state.registry = registry
    app.state.ui_dir = ui_dir
    session = requests.Session()

    def serve_ui(path: str) -> Response:
        rel = path[len("/ui"):].lstrip("/") or "index.html"
        base = os.path.realpath(app.state.ui_dir)
        full = os.path.realpath(os.path.join(base, rel))
        if not full.startswith(base + os.sep) and full != base:
            raise NoRoute(f"no route for {path}")
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            raise NoRoute(f"no route for {path}")
        media_type = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            return Response(content=fh.read(), media_type=media_type)

    @app.api_route(
        "/{path:path}",
        methods=["GET", "POST", "PUT", "DELETE"],
        include_in_schema=False,
    )
    async def proxy(request: Request, path: str) -> Response:
        full_path = "/" + path
        # hard guard: internal interfaces are never exposed
        if full_path == "/internal" or full_path.startswith("/internal/"):
            raise NoRoute("internal interfaces are not public")
        if app.state.ui_dir and (full_path == "/ui" or full_path.startswith("/ui/")):
            return serve_ui(full_path)

        rule = app.state.routes.match(full_path, request.method)
        if rule is None:
            raise NoRoute(f"no route for {request.method} {full_path}")

        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return Response(status_code=413, content=b"request body too large")

        try:
            address = registry.resolve_address(rule.target_service)
        except requests.RequestException as exc:
            raise NoHealthyInstance(f"registry unreachable: {exc}") from exc
        upstream_url = address + rule.upstream_path(full_path)
        if request.url.query:
            upstream_url += "?" + request.url.query

        headers = {
            k: v for k, v in request.headers.items()
            if k.lower() not in _HOP_HEADERS and k.lower() != "x-request-id"
        }
        headers["X-Request-Id"] = request.headers.get("X-Request-Id") or str(uuid.uuid4())

        try:
            upstream = session.request(
                request.method, upstream_url,
                headers=headers, data=body, timeout=UPSTREAM_TIMEOUT,
                allow_redirects=False,
            )
        except requests.RequestException as exc:
            raise UpstreamUnreachable(f"{rule.target_service} unreachable: {exc}") from exc

        response_headers = {
            k: v for k, v in upstream.headers.items() if k.lower() not in _HOP_HEADERS
        }
        return Response(
            content=upstream.content,
            status_code=upstream.status_code,
            headers=response_headers,
        )

    return app
