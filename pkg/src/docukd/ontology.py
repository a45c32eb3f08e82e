"""Ontology model shared by the learning and management services.

An ontology is a set of classes (label, synonyms, supporting documents) plus
subclass and associative axioms, each tagged with its provenance: learned by
the pipeline, inferred by rule generation, or added manually by a curator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .errors import ValidationFailed

DEFAULT_ONTOLOGY_IRI = "urn:docukd:onto"

#: annotation property marking inferred axioms in the Turtle export
INFERRED_ANNOTATION = "urn:docukd:inferred"


class Provenance(str, Enum):
    LEARNED = "learned"
    INFERRED = "inferred"
    MANUAL = "manual"


def slugify(label: str) -> str:
    """Lowercase the label and replace every non-alphanumeric char with '-'."""
    return "".join(c if c.isalnum() else "-" for c in label.lower())


def class_iri(ontology_iri: str, label: str) -> str:
    return f"{ontology_iri}#{slugify(label)}"


@dataclass(frozen=True)
class OntologyClass:
    iri: str
    label: str
    synonyms: FrozenSet[str] = frozenset()
    support: Tuple[str, ...] = ()
    provenance: Provenance = Provenance.LEARNED

    def __post_init__(self) -> None:
        object.__setattr__(self, "synonyms", frozenset(self.synonyms))
        object.__setattr__(self, "support", tuple(sorted(set(self.support))))
        if self.label in self.synonyms:
            raise ValidationFailed(f"label {self.label!r} repeated among synonyms")

    def names(self) -> Set[str]:
        return {self.label} | set(self.synonyms)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iri": self.iri,
            "label": self.label,
            "synonyms": sorted(self.synonyms),
            "support": list(self.support),
            "provenance": self.provenance.value,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "OntologyClass":
        return cls(
            iri=d["iri"],
            label=d["label"],
            synonyms=frozenset(d.get("synonyms", ())),
            support=tuple(d.get("support", ())),
            provenance=Provenance(d.get("provenance", "learned")),
        )


#: axiom = (endpoint a, endpoint b, provenance); subclass axioms are directed
#: (sub, super), related axioms are stored canonically with a < b
Axiom = Tuple[str, str, Provenance]


def _axiom_to_list(axiom: Axiom) -> List[str]:
    return [axiom[0], axiom[1], axiom[2].value]


def _axiom_from_list(raw: Iterable[str]) -> Axiom:
    a, b, prov = tuple(raw)
    return (a, b, Provenance(prov))


@dataclass(frozen=True)
class Ontology:
    ontology_iri: str = DEFAULT_ONTOLOGY_IRI
    classes: Tuple[OntologyClass, ...] = ()
    subclass_axioms: Tuple[Axiom, ...] = ()
    related_axioms: Tuple[Axiom, ...] = ()
    version: int = 0
    revised_manually: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(sorted(self.classes, key=lambda c: c.iri)))
        canon_related = tuple(
            (min(a, b), max(a, b), prov) for a, b, prov in self.related_axioms
        )
        object.__setattr__(self, "subclass_axioms", tuple(sorted(set(self.subclass_axioms))))
        object.__setattr__(self, "related_axioms", tuple(sorted(set(canon_related))))
        self._validate()

    def _validate(self) -> None:
        iris = [c.iri for c in self.classes]
        if len(set(iris)) != len(iris):
            raise ValidationFailed("duplicate class IRIs")
        known = set(iris)
        for a, b, _ in self.subclass_axioms + self.related_axioms:
            if a not in known or b not in known:
                raise ValidationFailed(f"axiom endpoint {a!r} or {b!r} is not a class")
            if a == b:
                raise ValidationFailed(f"self-referential axiom on {a!r}")
        if self.version < 0:
            raise ValidationFailed("version must be non-negative")
        cycle = find_subclass_cycle(self.subclass_axioms)
        if cycle:
            raise ValidationFailed(f"subclass cycle: {' -> '.join(cycle)}")

    def class_by_iri(self, iri: str) -> Optional[OntologyClass]:
        for cls in self.classes:
            if cls.iri == iri:
                return cls
        return None

    def content_key(self) -> Tuple:
        """Everything except version/revision flag; equal keys = equal content."""
        return (
            self.ontology_iri,
            tuple((c.iri, c.label, tuple(sorted(c.synonyms)), c.support, c.provenance)
                  for c in self.classes),
            self.subclass_axioms,
            self.related_axioms,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ontology_iri": self.ontology_iri,
            "classes": [c.to_dict() for c in self.classes],
            "subclass_axioms": [_axiom_to_list(a) for a in self.subclass_axioms],
            "related_axioms": [_axiom_to_list(a) for a in self.related_axioms],
            "version": self.version,
            "revised_manually": self.revised_manually,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Ontology":
        return cls(
            ontology_iri=d["ontology_iri"],
            classes=tuple(OntologyClass.from_dict(c) for c in d.get("classes", ())),
            subclass_axioms=tuple(_axiom_from_list(a) for a in d.get("subclass_axioms", ())),
            related_axioms=tuple(_axiom_from_list(a) for a in d.get("related_axioms", ())),
            version=int(d.get("version", 0)),
            revised_manually=bool(d.get("revised_manually", False)),
        )


def find_subclass_cycle(axioms: Iterable[Axiom]) -> Optional[List[str]]:
    """Return one cycle over learned+manual subclass edges, or None.

    Inferred axioms are excluded: a transitive closure of a DAG re-states
    reachability and must not count against acyclicity.
    """
    edges: Dict[str, List[str]] = {}
    for sub, sup, prov in axioms:
        if prov is Provenance.INFERRED:
            continue
        edges.setdefault(sub, []).append(sup)

    WHITE, GRAY, BLACK = 0, 1, 2
    color: Dict[str, int] = {}
    stack_path: List[str] = []

    def visit(node: str) -> Optional[List[str]]:
        color[node] = GRAY
        stack_path.append(node)
        for nxt in edges.get(node, ()):
            state = color.get(nxt, WHITE)
            if state == GRAY:
                idx = stack_path.index(nxt)
                return stack_path[idx:] + [nxt]
            if state == WHITE:
                found = visit(nxt)
                if found:
                    return found
        stack_path.pop()
        color[node] = BLACK
        return None

    for start in list(edges):
        if color.get(start, WHITE) == WHITE:
            found = visit(start)
            if found:
                return found
    return None


def would_create_cycle(axioms: Iterable[Axiom], sub: str, sup: str) -> bool:
    """True if adding sub -> super to the learned+manual hierarchy forms a cycle."""
    trial = list(axioms) + [(sub, sup, Provenance.MANUAL)]
    return find_subclass_cycle(trial) is not None
