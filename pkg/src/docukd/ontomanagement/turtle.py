"""Turtle serialization of the ontology model (an OWL subset).

Classes are owl:Class with rdfs:label, synonyms as skos:altLabel, subclass
as rdfs:subClassOf, associative relations as skos:related. Axiom provenance
beyond "learned" rides on owl:Axiom annotation blocks carrying the
annotation properties <urn:docukd:inferred> / <urn:docukd:provenance>, so
standard tools still read the plain triples. The mapping round-trips every
model field.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from ..errors import ValidationFailed
from ..ontology import Axiom, Ontology, OntologyClass, Provenance

PREFIXES = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "owl": "http://www.w3.org/2002/07/owl#",
    "skos": "http://www.w3.org/2004/02/skos/core#",
}

RDF_TYPE = PREFIXES["rdf"] + "type"
RDFS_LABEL = PREFIXES["rdfs"] + "label"
RDFS_SUBCLASS = PREFIXES["rdfs"] + "subClassOf"
OWL_ONTOLOGY = PREFIXES["owl"] + "Ontology"
OWL_CLASS = PREFIXES["owl"] + "Class"
OWL_AXIOM = PREFIXES["owl"] + "Axiom"
OWL_VERSION = PREFIXES["owl"] + "versionInfo"
OWL_SOURCE = PREFIXES["owl"] + "annotatedSource"
OWL_PROPERTY = PREFIXES["owl"] + "annotatedProperty"
OWL_TARGET = PREFIXES["owl"] + "annotatedTarget"
SKOS_ALT = PREFIXES["skos"] + "altLabel"
SKOS_RELATED = PREFIXES["skos"] + "related"

ANN_INFERRED = "urn:docukd:inferred"
ANN_PROVENANCE = "urn:docukd:provenance"
ANN_SUPPORT = "urn:docukd:support"
ANN_REVISED = "urn:docukd:revisedManually"


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\").replace('"', '\\"')
        .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _compact(iri: str) -> str:
    for prefix, base in PREFIXES.items():
        if iri.startswith(base):
            return f"{prefix}:{iri[len(base):]}"
    return f"<{iri}>"


def serialize(ontology: Ontology) -> str:
    lines: List[str] = []
    for prefix in sorted(PREFIXES):
        lines.append(f"@prefix {prefix}: <{PREFIXES[prefix]}> .")
    lines.append("")
    lines.append(f"<{ontology.ontology_iri}> a owl:Ontology ;")
    lines.append(f'    owl:versionInfo "{ontology.version}" ;')
    lines.append(f"    <{ANN_REVISED}> {str(ontology.revised_manually).lower()} .")
    lines.append("")

    for cls in ontology.classes:
        parts = [f"<{cls.iri}> a owl:Class", f'    rdfs:label "{_escape(cls.label)}"']
        for synonym in sorted(cls.synonyms):
            parts.append(f'    skos:altLabel "{_escape(synonym)}"')
        for doc_id in cls.support:
            parts.append(f'    <{ANN_SUPPORT}> "{_escape(doc_id)}"')
        if cls.provenance is not Provenance.LEARNED:
            parts.append(f'    <{ANN_PROVENANCE}> "{cls.provenance.value}"')
        lines.append(" ;\n".join(parts) + " .")
        lines.append("")

    def annotation_block(a: str, prop: str, b: str, prov: Provenance) -> List[str]:
        block = [
            "[] a owl:Axiom ;",
            f"    owl:annotatedSource <{a}> ;",
            f"    owl:annotatedProperty {_compact(prop)} ;",
            f"    owl:annotatedTarget <{b}> ;",
        ]
        if prov is Provenance.INFERRED:
            block.append(f"    <{ANN_INFERRED}> true .")
        else:
            block.append(f'    <{ANN_PROVENANCE}> "{prov.value}" .')
        return block

    for sub, sup, prov in ontology.subclass_axioms:
        lines.append(f"<{sub}> rdfs:subClassOf <{sup}> .")
        if prov is not Provenance.LEARNED:
            lines.extend(annotation_block(sub, RDFS_SUBCLASS, sup, prov))
    for a, b, prov in ontology.related_axioms:
        lines.append(f"<{a}> skos:related <{b}> .")
        if prov is not Provenance.LEARNED:
            lines.extend(annotation_block(a, SKOS_RELATED, b, prov))
    lines.append("")
    return "\n".join(lines)


# ----------------------------------------------------------------------
# parsing

class _Tokenizer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def tokens(self) -> List[Tuple[str, str]]:
        out: List[Tuple[str, str]] = []
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
            elif c == "#":
                eol = text.find("\n", i)
                i = n if eol == -1 else eol + 1
            elif c == "<":
                end = text.find(">", i)
                if end == -1:
                    raise ValidationFailed("unterminated IRI")
                out.append(("iri", text[i + 1:end]))
                i = end + 1
            elif c == '"':
                j = i + 1
                while j < n:
                    if text[j] == "\\":
                        j += 2
                        continue
                    if text[j] == '"':
                        break
                    j += 1
                if j >= n:
                    raise ValidationFailed("unterminated string")
                out.append(("string", _unescape(text[i + 1:j])))
                i = j + 1
            elif c in ".;,":
                out.append(("punct", c))
                i += 1
            elif text.startswith("[]", i):
                out.append(("blank", "[]"))
                i += 2
            elif text.startswith("@prefix", i):
                out.append(("at", "@prefix"))
                i += len("@prefix")
            else:
                j = i
                while j < n and text[j] not in ' \t\r\n<>"#.;,':
                    j += 1
                if j == i:
                    raise ValidationFailed(f"unexpected character {c!r}")
                out.append(("word", text[i:j]))
                i = j
        return out


def _parse_triples(text: str) -> List[Tuple[str, str, object]]:
    """Flatten the document into (subject, predicate, object) triples.

    Blank-node subjects get fresh synthetic ids. Objects are IRIs (str after
    expansion), or ("lit", value) tuples for literals.
    """
    tokens = _Tokenizer(text).tokens()
    prefixes: Dict[str, str] = {}
    triples: List[Tuple[str, str, object]] = []
    blank_counter = 0

    def expand(kind: str, value: str) -> object:
        if kind == "iri":
            return value
        if kind == "string":
            return ("lit", value)
        if kind == "blank":
            return None
        # word: prefixed name, boolean, number, or 'a'
        if value == "a":
            return RDF_TYPE
        if value in ("true", "false"):
            return ("lit", value == "true")
        if ":" in value:
            prefix, local = value.split(":", 1)
            if prefix in prefixes:
                return prefixes[prefix] + local
        try:
            return ("lit", int(value))
        except ValueError:
            raise ValidationFailed(f"cannot interpret token {value!r}")

    i = 0
    n = len(tokens)
    while i < n:
        kind, value = tokens[i]
        if kind == "at":
            # @prefix name: <iri> .
            name = tokens[i + 1][1].rstrip(":")
            iri = tokens[i + 2][1]
            prefixes[name] = iri
            i += 4  # skip the closing '.'
            continue
        # subject
        if kind == "blank":
            blank_counter += 1
            subject = f"_:b{blank_counter}"
        elif kind == "iri":
            subject = value
        else:
            raise ValidationFailed(f"bad subject token {value!r}")
        i += 1
        # predicate-object list
        while True:
            p_kind, p_value = tokens[i]
            predicate = expand(p_kind, p_value)
            if not isinstance(predicate, str):
                raise ValidationFailed(f"bad predicate {p_value!r}")
            i += 1
            while True:
                o_kind, o_value = tokens[i]
                obj = expand(o_kind, o_value)
                triples.append((subject, predicate, obj))
                i += 1
                if tokens[i] != ("punct", ","):
                    break
                i += 1
            if tokens[i] == ("punct", ";"):
                i += 1
                continue
            if tokens[i] == ("punct", "."):
                i += 1
                break
            raise ValidationFailed(f"expected ';' or '.', got {tokens[i]!r}")
    return triples


def parse(text: str) -> Ontology:
    triples = _parse_triples(text)
    by_subject: Dict[str, List[Tuple[str, object]]] = {}
    for s, p, o in triples:
        by_subject.setdefault(s, []).append((p, o))

    ontology_iri: Optional[str] = None
    version = 0
    revised = False
    classes: Dict[str, Dict] = {}
    subclass: List[Tuple[str, str]] = []
    related: List[Tuple[str, str]] = []
    annotations: Dict[Tuple[str, str, str], Provenance] = {}

    for subject, pairs in by_subject.items():
        types = [o for p, o in pairs if p == RDF_TYPE]
        if OWL_ONTOLOGY in types:
            ontology_iri = subject
            for p, o in pairs:
                if p == OWL_VERSION and isinstance(o, tuple):
                    version = int(o[1])
                elif p == ANN_REVISED and isinstance(o, tuple):
                    revised = bool(o[1])
        elif OWL_AXIOM in types:
            source = target = prop = None
            prov: Provenance = Provenance.LEARNED
            for p, o in pairs:
                if p == OWL_SOURCE:
                    source = o
                elif p == OWL_TARGET:
                    target = o
                elif p == OWL_PROPERTY:
                    prop = o
                elif p == ANN_INFERRED and isinstance(o, tuple) and o[1] is True:
                    prov = Provenance.INFERRED
                elif p == ANN_PROVENANCE and isinstance(o, tuple):
                    prov = Provenance(o[1])
            if source and target and prop:
                annotations[(source, prop, target)] = prov
        elif OWL_CLASS in types:
            entry = {"label": None, "synonyms": set(), "support": [],
                     "provenance": Provenance.LEARNED}
            for p, o in pairs:
                if p == RDFS_LABEL and isinstance(o, tuple):
                    entry["label"] = o[1]
                elif p == SKOS_ALT and isinstance(o, tuple):
                    entry["synonyms"].add(o[1])
                elif p == ANN_SUPPORT and isinstance(o, tuple):
                    entry["support"].append(o[1])
                elif p == ANN_PROVENANCE and isinstance(o, tuple):
                    entry["provenance"] = Provenance(o[1])
            classes[subject] = entry

    for s, p, o in triples:
        if p == RDFS_SUBCLASS and isinstance(o, str) and not s.startswith("_:"):
            subclass.append((s, o))
        elif p == SKOS_RELATED and isinstance(o, str) and not s.startswith("_:"):
            related.append((s, o))

    if ontology_iri is None:
        raise ValidationFailed("no owl:Ontology header found")

    def axiom(kind_prop: str, a: str, b: str) -> Axiom:
        prov = annotations.get((a, kind_prop, b), Provenance.LEARNED)
        return (a, b, prov)

    return Ontology(
        ontology_iri=ontology_iri,
        classes=tuple(
            OntologyClass(
                iri=iri,
                label=entry["label"] or iri,
                synonyms=frozenset(entry["synonyms"]),
                support=tuple(entry["support"]),
                provenance=entry["provenance"],
            )
            for iri, entry in classes.items()
        ),
        subclass_axioms=tuple(axiom(RDFS_SUBCLASS, a, b) for a, b in subclass),
        related_axioms=tuple(axiom(SKOS_RELATED, a, b) for a, b in related),
        version=version,
        revised_manually=revised,
    )
