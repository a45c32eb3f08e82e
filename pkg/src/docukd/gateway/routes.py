"""Route table: public prefix -> target service, longest prefix wins."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence

from ..errors import InvalidRouteConfig

ALLOWED_METHODS = {"GET", "POST", "PUT", "DELETE"}

#: clients reach exactly four public surfaces; everything else stays internal
DEFAULT_ROUTES: Sequence[Dict[str, Any]] = (
    {"public_prefix": "/documents", "target_service": "docprocessing",
     "strip_prefix": False, "methods": ["GET", "POST"]},
    {"public_prefix": "/query", "target_service": "querying",
     "strip_prefix": False, "methods": ["GET", "POST"]},
    {"public_prefix": "/ontomanagement", "target_service": "ontomanagement",
     "strip_prefix": False, "methods": ["GET", "POST"]},
)


@dataclass(frozen=True)
class RouteRule:
    public_prefix: str
    target_service: str
    strip_prefix: bool = False
    methods: FrozenSet[str] = frozenset(ALLOWED_METHODS)

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", frozenset(m.upper() for m in self.methods))
        if not self.public_prefix.startswith("/") or self.public_prefix.endswith("/"):
            raise InvalidRouteConfig(
                f"prefix must start with '/' and not end with '/': {self.public_prefix!r}"
            )
        if not self.methods or not self.methods <= ALLOWED_METHODS:
            raise InvalidRouteConfig(f"bad method set: {sorted(self.methods)}")

    def matches(self, path: str, method: str) -> bool:
        if method.upper() not in self.methods:
            return False
        if path == self.public_prefix:
            return True
        return path.startswith(self.public_prefix + "/")

    def upstream_path(self, path: str) -> str:
        if not self.strip_prefix:
            return path
        stripped = path[len(self.public_prefix):]
        return stripped if stripped.startswith("/") else "/" + stripped

    def to_dict(self) -> Dict[str, Any]:
        return {
            "public_prefix": self.public_prefix,
            "target_service": self.target_service,
            "strip_prefix": self.strip_prefix,
            "methods": sorted(self.methods),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RouteRule":
        return cls(
            public_prefix=d["public_prefix"],
            target_service=d["target_service"],
            strip_prefix=bool(d.get("strip_prefix", False)),
            methods=frozenset(d.get("methods", sorted(ALLOWED_METHODS))),
        )


class RouteTable:
    def __init__(self, rules: Sequence[RouteRule]) -> None:
        prefixes = [r.public_prefix for r in rules]
        if len(set(prefixes)) != len(prefixes):
            raise InvalidRouteConfig("duplicate route prefixes")
        # longest prefix first so the first match wins
        self.rules: List[RouteRule] = sorted(
            rules, key=lambda r: len(r.public_prefix), reverse=True
        )

    @classmethod
    def from_config(cls, raw: Sequence[Dict[str, Any]]) -> "RouteTable":
        if not isinstance(raw, (list, tuple)):
            raise InvalidRouteConfig("route config must be a list of rules")
        return cls([RouteRule.from_dict(d) for d in raw])

    @classmethod
    def default(cls) -> "RouteTable":
        return cls.from_config(list(DEFAULT_ROUTES))

    def match(self, path: str, method: str) -> Optional[RouteRule]:
        for rule in self.rules:
            if rule.matches(path, method):
                return rule
        return None
