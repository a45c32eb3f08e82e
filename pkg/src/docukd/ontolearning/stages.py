"""The learning stages, run in order over accumulated keyword evidence:
synonym recognition, concept generation, relation extraction, rule
generation. Term extraction itself happens upstream in the document
pipeline; evidence arrives here as per-document keyword lists plus text.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from ..errors import CyclicHierarchy
from ..ontology import (
    Axiom,
    OntologyClass,
    Provenance,
    class_iri,
    find_subclass_cycle,
)

DEFAULT_SYNONYM_THRESHOLD = 0.8
DEFAULT_PMI_THRESHOLD = 1.0

#: evidence for one term: the documents it keyword-scored in, with scores
TermVectors = Dict[str, Dict[str, float]]


def vector_cosine(a: Dict[str, float], b: Dict[str, float]) -> float:
    dot = sum(w * b.get(doc, 0.0) for doc, w in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def _is_token_subphrase(a: str, b: str) -> bool:
    """True when one term is the other plus at least one extra token."""
    ta, tb = a.split(), b.split()
    if len(ta) == len(tb):
        return False
    short, long_ = (ta, tb) if len(ta) < len(tb) else (tb, ta)
    span = len(short)
    return any(long_[i:i + span] == short for i in range(len(long_) - span + 1))


def recognize_synonyms(
    evidence: TermVectors,
    threshold: float = DEFAULT_SYNONYM_THRESHOLD,
    lexicon_pairs: Iterable[Tuple[str, str]] = (),
) -> Set[FrozenSet[str]]:
    """Pairs with near-identical document distributions are synonym candidates;
    sub-phrase pairs are left to the subclass stage instead."""
    terms = sorted(evidence)
    pairs: Set[FrozenSet[str]] = set()
    for i, s in enumerate(terms):
        for t in terms[i + 1:]:
            if _is_token_subphrase(s, t):
                continue
            if vector_cosine(evidence[s], evidence[t]) >= threshold:
                pairs.add(frozenset((s, t)))
    for a, b in lexicon_pairs:
        if a != b and a in evidence and b in evidence:
            pairs.add(frozenset((a, b)))
    return pairs


class _UnionFind:
    def __init__(self, items: Iterable[str]) -> None:
        self.parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def generate_concepts(
    evidence: TermVectors,
    synonym_pairs: Set[FrozenSet[str]],
    ontology_iri: str,
) -> List[OntologyClass]:
    """Union-find over synonym pairs; each component becomes one class.

    The member with the highest total score is the label (ties go to the
    lexicographically first term); the rest become synonyms.
    """
    uf = _UnionFind(evidence.keys())
    for pair in synonym_pairs:
        a, b = sorted(pair)
        uf.union(a, b)
    components: Dict[str, List[str]] = defaultdict(list)
    for term in evidence:
        components[uf.find(term)].append(term)

    classes = []
    for members in components.values():
        totals = {term: sum(evidence[term].values()) for term in members}
        label = min(members, key=lambda t: (-totals[t], t))
        support = set()
        for term in members:
            support.update(evidence[term])
        classes.append(OntologyClass(
            iri=class_iri(ontology_iri, label),
            label=label,
            synonyms=frozenset(m for m in members if m != label),
            support=tuple(sorted(support)),
            provenance=Provenance.LEARNED,
        ))
    return sorted(classes, key=lambda c: c.iri)


_SENTENCE_SPLIT = re.compile(r"[.!?]+")


def extract_relations(
    classes: Sequence[OntologyClass],
    corpus_texts: Sequence[str],
    doc_count: int,
    pmi_threshold: float = DEFAULT_PMI_THRESHOLD,
) -> Tuple[List[Axiom], List[Axiom]]:
    """Subclass axioms from lexical patterns and compositional heads;
    associative axioms from document co-occurrence (PMI)."""
    by_name: Dict[str, OntologyClass] = {}
    for cls in classes:
        for name in cls.names():
            by_name[name.lower()] = cls
    subclass: Set[Tuple[str, str]] = set()

    if by_name:
        names_alt = "|".join(
            re.escape(name) for name in sorted(by_name, key=len, reverse=True)
        )
        # (hypernym-position, hyponym-position) per template
        templates = (
            (rf"\b({names_alt})\s+is\s+an?\s+({names_alt})\b", "sub-super"),
            (rf"\b({names_alt})\s+such\s+as\s+({names_alt})\b", "super-sub"),
            (rf"\b({names_alt})\s+including\s+({names_alt})\b", "super-sub"),
        )
        compiled = [(re.compile(pattern, re.IGNORECASE), order) for pattern, order in templates]
        for text in corpus_texts:
            for sentence in _SENTENCE_SPLIT.split(text):
                low = sentence.lower()
                for regex, order in compiled:
                    for m in regex.finditer(low):
                        first = by_name[m.group(1)]
                        second = by_name[m.group(2)]
                        if first.iri == second.iri:
                            continue
                        if order == "sub-super":
                            subclass.add((first.iri, second.iri))
                        else:
                            subclass.add((second.iri, first.iri))

    labels = {cls.label: cls for cls in classes}
    for cls in classes:
        tokens = cls.label.split()
        if len(tokens) > 1:
            head = labels.get(tokens[-1])
            if head is not None and head.iri != cls.iri:
                subclass.add((cls.iri, head.iri))

    related: Set[Tuple[str, str]] = set()
    ordered = sorted(classes, key=lambda c: c.iri)
    if doc_count > 0:
        for i, a in enumerate(ordered):
            docs_a = set(a.support)
            if not docs_a:
                continue
            for b in ordered[i + 1:]:
                docs_b = set(b.support)
                co = len(docs_a & docs_b)
                if co == 0 or not docs_b:
                    continue
                if (a.iri, b.iri) in subclass or (b.iri, a.iri) in subclass:
                    continue
                pmi = math.log(co * doc_count / (len(docs_a) * len(docs_b)))
                if pmi >= pmi_threshold:
                    related.add((a.iri, b.iri))

    subclass_axioms = sorted(
        (sub, sup, Provenance.LEARNED) for sub, sup in subclass
    )
    related_axioms = sorted(
        (a, b, Provenance.LEARNED) for a, b in related
    )
    return subclass_axioms, related_axioms


def generate_rules(subclass_axioms: Sequence[Axiom]) -> List[Axiom]:
    """Transitive closure of the subclass hierarchy minus what is already
    stated, emitted with inferred provenance."""
    cycle = find_subclass_cycle(subclass_axioms)
    if cycle:
        raise CyclicHierarchy(f"subclass cycle: {' -> '.join(cycle)}")
    edges: Dict[str, Set[str]] = defaultdict(set)
    for sub, sup, prov in subclass_axioms:
        if prov is not Provenance.INFERRED:
            edges[sub].add(sup)

    def reachable(start: str) -> Set[str]:
        seen: Set[str] = set()
        stack = list(edges.get(start, ()))
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(edges.get(node, ()))
        return seen

    stated = {(sub, sup) for sub, sup, _ in subclass_axioms}
    inferred = []
    for start in sorted(edges):
        for target in sorted(reachable(start)):
            if (start, target) not in stated and start != target:
                inferred.append((start, target, Provenance.INFERRED))
    return sorted(inferred)
