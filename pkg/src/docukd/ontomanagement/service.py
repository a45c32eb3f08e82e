"""Ontology management: stores learned versions, applies curator edits,
publishes revisions back to learning, and projects the visualization graph.
"""

from __future__ import annotations

import logging
import threading
from typing import Any, Dict, List, Optional

from ..clients import BusClient
from ..errors import (
    CycleRejected,
    DuplicateClass,
    NoOntology,
    UnknownClass,
    ValidationError,
    ValidationFailed,
)
from ..msgbus.broker import MessageEnvelope
from ..ontology import (
    Axiom,
    Ontology,
    OntologyClass,
    Provenance,
    class_iri,
    would_create_cycle,
)
from ..store import DocStore
from . import turtle

log = logging.getLogger("docukd.ontomanagement")

ONTOLOGIES = "ontologies"
LATEST = "latest"

REVISED_QUEUE = "q.ontolearn.revised"


class OntoManagementService:
    def __init__(self, store: DocStore, bus: Optional[BusClient] = None) -> None:
        self.store = store
        self.bus = bus
        # edits and stored learned versions are serialized
        self._write_lock = threading.Lock()

    # ------------------------------------------------------------------
    # learned versions arriving from the queue

    def handle_learned(self, envelope: MessageEnvelope) -> None:
        self.store_learned(Ontology.from_dict(envelope.payload))

    def store_learned(self, ontology: Ontology) -> bool:
        with self._write_lock:
            current = self._load()
            if current is not None and ontology.version <= current.version:
                log.info("ignoring stale ontology version %d (have %d)",
                         ontology.version, current.version)
                return False
            self.store.put(ONTOLOGIES, LATEST, ontology.to_dict())
            self.store.put(ONTOLOGIES, "turtle", turtle.serialize(ontology))
            return True

    def _load(self) -> Optional[Ontology]:
        raw = self.store.get(ONTOLOGIES, LATEST)
        return Ontology.from_dict(raw) if raw else None

    def current(self) -> Ontology:
        ontology = self._load()
        if ontology is None:
            raise NoOntology("no ontology has been learned yet")
        return ontology

    # ------------------------------------------------------------------
    # reads

    def get_ontology(self, format: str = "json") -> Any:
        ontology = self.current()
        if format == "turtle":
            return turtle.serialize(ontology)
        if format == "json":
            return ontology.to_dict()
        raise ValidationError(f"unknown format {format!r} (use turtle or json)")

    def get_visualisation(self) -> Dict[str, Any]:
        ontology = self.current()
        nodes = [
            {"id": cls.iri, "label": cls.label, "type": "class"}
            for cls in ontology.classes
        ]
        edges = []
        for sub, sup, prov in ontology.subclass_axioms:
            edges.append({
                "from": sub, "to": sup, "label": "subClassOf",
                "inferred": prov is Provenance.INFERRED,
            })
        for a, b, prov in ontology.related_axioms:
            edges.append({
                "from": a, "to": b, "label": "relatedTo",
                "inferred": prov is Provenance.INFERRED,
            })
        return {"nodes": nodes, "edges": edges}

    # ------------------------------------------------------------------
    # edits

    def edit(self, command: Dict[str, Any]) -> Ontology:
        with self._write_lock:
            ontology = self.current()
            action = command.get("action", "")
            handler = getattr(self, f"_edit_{action}", None)
            if handler is None:
                raise ValidationError(f"unknown edit action {action!r}")
            revised = handler(ontology, command)
            revised = Ontology(
                ontology_iri=revised.ontology_iri,
                classes=revised.classes,
                subclass_axioms=revised.subclass_axioms,
                related_axioms=revised.related_axioms,
                version=ontology.version + 1,
                revised_manually=True,
            )
            self.store.put(ONTOLOGIES, LATEST, revised.to_dict())
            self.store.put(ONTOLOGIES, "turtle", turtle.serialize(revised))
        if self.bus is not None:
            self.bus.publish(REVISED_QUEUE, revised.ontology_iri, "Ontology",
                             revised.to_dict())
        return revised

    @staticmethod
    def _require_class(ontology: Ontology, iri: str) -> OntologyClass:
        cls = ontology.class_by_iri(iri)
        if cls is None:
            raise UnknownClass(f"no class {iri!r}")
        return cls

    def _replace_class(self, ontology: Ontology, updated: OntologyClass) -> Ontology:
        classes = tuple(
            updated if c.iri == updated.iri else c for c in ontology.classes
        )
        return Ontology(
            ontology_iri=ontology.ontology_iri, classes=classes,
            subclass_axioms=ontology.subclass_axioms,
            related_axioms=ontology.related_axioms,
            version=ontology.version, revised_manually=ontology.revised_manually,
        )

    def _edit_add_class(self, ontology: Ontology, cmd: Dict) -> Ontology:
        label = (cmd.get("label") or "").strip()
        if not label:
            raise ValidationError("add_class requires a label")
        iri = class_iri(ontology.ontology_iri, label)
        if ontology.class_by_iri(iri) is not None:
            raise DuplicateClass(f"class {iri!r} already exists")
        cls = OntologyClass(iri=iri, label=label, provenance=Provenance.MANUAL)
        return Ontology(
            ontology_iri=ontology.ontology_iri,
            classes=ontology.classes + (cls,),
            subclass_axioms=ontology.subclass_axioms,
            related_axioms=ontology.related_axioms,
            version=ontology.version, revised_manually=ontology.revised_manually,
        )

    def _edit_remove_class(self, ontology: Ontology, cmd: Dict) -> Ontology:
        iri = cmd.get("iri", "")
        self._require_class(ontology, iri)
        return Ontology(
            ontology_iri=ontology.ontology_iri,
            classes=tuple(c for c in ontology.classes if c.iri != iri),
            subclass_axioms=tuple(
                ax for ax in ontology.subclass_axioms if iri not in (ax[0], ax[1])
            ),
            related_axioms=tuple(
                ax for ax in ontology.related_axioms if iri not in (ax[0], ax[1])
            ),
            version=ontology.version, revised_manually=ontology.revised_manually,
        )

    def _edit_rename_class(self, ontology: Ontology, cmd: Dict) -> Ontology:
        cls = self._require_class(ontology, cmd.get("iri", ""))
        label = (cmd.get("label") or "").strip()
        if not label:
            raise ValidationError("rename_class requires a label")
        updated = OntologyClass(
            iri=cls.iri,  # the IRI is stable across renames
            label=label,
            synonyms=frozenset(s for s in cls.synonyms if s != label),
            support=cls.support,
            provenance=cls.provenance,
        )
        return self._replace_class(ontology, updated)

    def _edit_add_synonym(self, ontology: Ontology, cmd: Dict) -> Ontology:
        cls = self._require_class(ontology, cmd.get("iri", ""))
        term = (cmd.get("term") or "").strip()
        if not term:
            raise ValidationError("add_synonym requires a term")
        if term == cls.label:
            raise ValidationError("synonym equal to the label")
        updated = OntologyClass(
            iri=cls.iri, label=cls.label,
            synonyms=cls.synonyms | {term},
            support=cls.support, provenance=cls.provenance,
        )
        return self._replace_class(ontology, updated)

    def _edit_remove_synonym(self, ontology: Ontology, cmd: Dict) -> Ontology:
        cls = self._require_class(ontology, cmd.get("iri", ""))
        term = (cmd.get("term") or "").strip()
        updated = OntologyClass(
            iri=cls.iri, label=cls.label,
            synonyms=cls.synonyms - {term},
            support=cls.support, provenance=cls.provenance,
        )
        return self._replace_class(ontology, updated)

    def _edit_add_subclass(self, ontology: Ontology, cmd: Dict) -> Ontology:
        sub, sup = cmd.get("sub", ""), cmd.get("super", "")
        self._require_class(ontology, sub)
        self._require_class(ontology, sup)
        if sub == sup:
            raise CycleRejected("a class cannot subclass itself")
        if would_create_cycle(ontology.subclass_axioms, sub, sup):
            raise CycleRejected(f"{sub} -> {sup} would create a cycle")
        return Ontology(
            ontology_iri=ontology.ontology_iri, classes=ontology.classes,
            subclass_axioms=ontology.subclass_axioms + ((sub, sup, Provenance.MANUAL),),
            related_axioms=ontology.related_axioms,
            version=ontology.version, revised_manually=ontology.revised_manually,
        )

    def _edit_remove_axiom(self, ontology: Ontology, cmd: Dict) -> Ontology:
        kind, a, b = cmd.get("kind", ""), cmd.get("a", ""), cmd.get("b", "")
        if kind == "subclass":
            keep = tuple(
                ax for ax in ontology.subclass_axioms if (ax[0], ax[1]) != (a, b)
            )
            if len(keep) == len(ontology.subclass_axioms):
                raise ValidationError(f"no subclass axiom {a} -> {b}")
            return Ontology(
                ontology_iri=ontology.ontology_iri, classes=ontology.classes,
                subclass_axioms=keep, related_axioms=ontology.related_axioms,
                version=ontology.version, revised_manually=ontology.revised_manually,
            )
        if kind == "related":
            lo, hi = min(a, b), max(a, b)
            keep = tuple(
                ax for ax in ontology.related_axioms if (ax[0], ax[1]) != (lo, hi)
            )
            if len(keep) == len(ontology.related_axioms):
                raise ValidationError(f"no related axiom {a} -- {b}")
            return Ontology(
                ontology_iri=ontology.ontology_iri, classes=ontology.classes,
                subclass_axioms=ontology.subclass_axioms, related_axioms=keep,
                version=ontology.version, revised_manually=ontology.revised_manually,
            )
        raise ValidationError(f"unknown axiom kind {kind!r}")
