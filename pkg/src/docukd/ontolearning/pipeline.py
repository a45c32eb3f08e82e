"""Ontology-learning service: evidence accumulation, full re-learn runs,
and the bidirectional exchange with ontology management.

Each learn run recomputes the ontology from ALL accumulated evidence, then
merges the manual baseline: manually added classes and axioms are preserved
verbatim, and anything the curator deleted (tracked as tombstones from the
diff between published and revised versions) stays suppressed.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Dict, Iterable, List, Optional, Set, Tuple

from ..clients import BusClient
from ..errors import ValidationFailed
from ..model import ExtractedText, TermExtractionResult
from ..msgbus.broker import MessageEnvelope
from ..ontology import DEFAULT_ONTOLOGY_IRI, Axiom, Ontology, OntologyClass, Provenance
from ..store import DocStore
from .stages import (
    DEFAULT_PMI_THRESHOLD,
    DEFAULT_SYNONYM_THRESHOLD,
    TermVectors,
    extract_relations,
    generate_concepts,
    generate_rules,
    recognize_synonyms,
)

log = logging.getLogger("docukd.ontolearning")

EVIDENCE = "evidence"
STATE = "state"
STATE_KEY = "learning"

PUBLISH_QUEUE = "q.ontomgmt.ontologies"

DEFAULT_DEBOUNCE_SECS = 5.0
DEFAULT_BATCH_MAX = 50


def load_lexicon(path: Optional[str]) -> List[Tuple[str, str]]:
    """Synonym lexicon file: tab-separated equivalent terms, one group per line."""
    if not path:
        return []
    pairs: List[Tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            terms = [t.strip().lower() for t in line.split("\t") if t.strip()]
            for i, a in enumerate(terms):
                for b in terms[i + 1:]:
                    pairs.append((a, b))
    return pairs


class OntolearnService:
    def __init__(
        self,
        store: DocStore,
        bus: Optional[BusClient] = None,
        ontology_iri: str = DEFAULT_ONTOLOGY_IRI,
        synonym_threshold: float = DEFAULT_SYNONYM_THRESHOLD,
        pmi_threshold: float = DEFAULT_PMI_THRESHOLD,
        lexicon_pairs: Iterable[Tuple[str, str]] = (),
        debounce_secs: float = DEFAULT_DEBOUNCE_SECS,
        batch_max: int = DEFAULT_BATCH_MAX,
    ) -> None:
        self.store = store
        self.bus = bus
        self.ontology_iri = ontology_iri
        self.synonym_threshold = synonym_threshold
        self.pmi_threshold = pmi_threshold
        self.lexicon_pairs = list(lexicon_pairs)
        self.debounce_secs = debounce_secs
        self.batch_max = batch_max
        self._learn_lock = threading.Lock()
        self._ingest_lock = threading.Lock()
        self.last_ingest_at: Optional[float] = None
        self.pending_since_learn = 0

    # ------------------------------------------------------------------
    # queue handlers

    def handle_ingest(self, envelope: MessageEnvelope) -> None:
        payload = envelope.payload
        extraction = TermExtractionResult.from_dict(payload["term_extraction"])
        text = ExtractedText.from_dict(payload["extracted_text"])
        self.ingest(extraction, text)

    def ingest(self, extraction: TermExtractionResult, text: ExtractedText) -> bool:
        with self._ingest_lock:
            fresh = not self.store.contains(EVIDENCE, extraction.doc_id)
            self.store.put(EVIDENCE, extraction.doc_id, {
                "keywords": [[k.term, k.score] for k in extraction.keywords],
                "text": text.text,
            })
            self.last_ingest_at = time.monotonic()
            if fresh:
                self.pending_since_learn += 1
            return fresh

    def handle_revised(self, envelope: MessageEnvelope) -> None:
        self.accept_revised(Ontology.from_dict(envelope.payload))

    def accept_revised(self, revised: Ontology) -> None:
        """A manually revised ontology becomes the baseline for future learns;
        deletions relative to the last published version become tombstones."""
        if revised.ontology_iri != self.ontology_iri:
            raise ValidationFailed(
                f"revised ontology {revised.ontology_iri!r} does not match "
                f"{self.ontology_iri!r}"
            )
        with self._learn_lock:
            state = self._load_state()
            published = state.get("last_published")
            tomb_axioms: Set[Tuple[str, str, str]] = {
                tuple(t) for t in state.get("tombstone_axioms", [])
            }
            tomb_classes: Set[str] = set(state.get("tombstone_classes", []))
            if published is not None:
                old = Ontology.from_dict(published)
                old_axioms = {("subclass", a, b) for a, b, _ in old.subclass_axioms}
                old_axioms |= {("related", a, b) for a, b, _ in old.related_axioms}
                new_axioms = {("subclass", a, b) for a, b, _ in revised.subclass_axioms}
                new_axioms |= {("related", a, b) for a, b, _ in revised.related_axioms}
                tomb_axioms |= old_axioms - new_axioms
                tomb_axioms -= new_axioms  # re-added by the curator
                old_classes = {c.iri for c in old.classes}
                new_classes = {c.iri for c in revised.classes}
                tomb_classes |= old_classes - new_classes
                tomb_classes -= new_classes
            state["baseline"] = revised.to_dict()
            state["tombstone_axioms"] = sorted(tomb_axioms)
            state["tombstone_classes"] = sorted(tomb_classes)
            state["last_version"] = max(state.get("last_version", 0), revised.version)
            self._save_state(state)

    # ------------------------------------------------------------------
    # learning

    def _load_state(self) -> Dict:
        return self.store.get(STATE, STATE_KEY, default={}) or {}

    def _save_state(self, state: Dict) -> None:
        self.store.put(STATE, STATE_KEY, state)

    def _evidence_snapshot(self) -> Tuple[TermVectors, Dict[str, str]]:
        vectors: TermVectors = {}
        texts: Dict[str, str] = {}
        for doc_id, raw in self.store.items(EVIDENCE):
            texts[doc_id] = raw["text"]
            for term, score in raw["keywords"]:
                vectors.setdefault(term, {})[doc_id] = score
        return vectors, texts

    def learn(self) -> Optional[Ontology]:
        """One full learning run over all accumulated evidence; returns the
        published ontology, or None when there is nothing to learn from."""
        with self._learn_lock:
            evidence, texts = self._evidence_snapshot()
            if not texts:
                return None
            state = self._load_state()
            ontology = self._learn_locked(evidence, texts, state)
            state["last_published"] = ontology.to_dict()
            state["last_version"] = ontology.version
            self._save_state(state)
            with self._ingest_lock:
                self.pending_since_learn = 0
        if self.bus is not None:
            self.bus.publish(PUBLISH_QUEUE, ontology.ontology_iri, "Ontology",
                             ontology.to_dict())
        return ontology

    def _learn_locked(self, evidence: TermVectors, texts: Dict[str, str],
                      state: Dict) -> Ontology:
        tomb_axioms = {tuple(t) for t in state.get("tombstone_axioms", [])}
        tomb_classes = set(state.get("tombstone_classes", []))
        baseline = (
            Ontology.from_dict(state["baseline"]) if state.get("baseline") else None
        )

        synonym_pairs = recognize_synonyms(
            evidence, self.synonym_threshold, self.lexicon_pairs
        )
        learned_classes = generate_concepts(evidence, synonym_pairs, self.ontology_iri)
        learned_classes = [c for c in learned_classes if c.iri not in tomb_classes]
        subclass, related = extract_relations(
            learned_classes, list(texts.values()), doc_count=len(texts),
            pmi_threshold=self.pmi_threshold,
        )

        classes: Dict[str, OntologyClass] = {c.iri: c for c in learned_classes}
        if baseline is not None:
            for cls in baseline.classes:
                if cls.provenance is Provenance.MANUAL:
                    classes[cls.iri] = cls  # manual classes win verbatim

        def keep(kind: str, axiom: Axiom) -> bool:
            a, b, _ = axiom
            if (kind, a, b) in tomb_axioms:
                return False
            return a in classes and b in classes

        subclass = [ax for ax in subclass if keep("subclass", ax)]
        related = [ax for ax in related if keep("related", ax)]
        if baseline is not None:
            for a, b, prov in baseline.subclass_axioms:
                if prov is Provenance.MANUAL and keep("subclass", (a, b, prov)):
                    subclass.append((a, b, prov))
            for a, b, prov in baseline.related_axioms:
                if prov is Provenance.MANUAL and keep("related", (a, b, prov)):
                    related.append((a, b, prov))

        subclass = sorted(set(subclass))
        inferred = [
            ax for ax in generate_rules(subclass)
            if keep("subclass", ax)
        ]
        version = state.get("last_version", 0) + 1
        return Ontology(
            ontology_iri=self.ontology_iri,
            classes=tuple(classes.values()),
            subclass_axioms=tuple(subclass + inferred),
            related_axioms=tuple(sorted(set(related))),
            version=version,
            revised_manually=False,
        )

    # ------------------------------------------------------------------
    # debounced trigger (driven by a runtime thread)

    def due_for_learn(self) -> bool:
        with self._ingest_lock:
            if self.pending_since_learn <= 0:
                return False
            if self.pending_since_learn >= self.batch_max:
                return True
            if self.last_ingest_at is None:
                return False
            return time.monotonic() - self.last_ingest_at >= self.debounce_secs


class LearnScheduler(threading.Thread):
    """Kicks off a learn run once the ingest queue has been idle long enough
    or enough documents have piled up."""

    def __init__(self, service: OntolearnService, check_interval: float = 0.25) -> None:
        super().__init__(name="learn-scheduler", daemon=True)
        self.service = service
        self.check_interval = check_interval
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                if self.service.due_for_learn():
                    self.service.learn()
            except Exception:
                log.exception("learn run failed")
            self._stop.wait(self.check_interval)

    def stop(self) -> None:
        self._stop.set()
