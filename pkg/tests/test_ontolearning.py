"""Learning stages: synonym cosine scan, union-find concepts, planted
lexical patterns, PMI edges, closure vs Floyd-Warshall, tombstone merges."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from docukd.errors import CyclicHierarchy
from docukd.model import ExtractedText, TermExtractionResult, new_document_id
from docukd.ontology import Ontology, OntologyClass, Provenance, class_iri, slugify
from docukd.ontolearning.pipeline import OntolearnService, load_lexicon
from docukd.ontolearning.stages import (
    extract_relations,
    generate_concepts,
    generate_rules,
    recognize_synonyms,
    vector_cosine,
)
from docukd.store import DocStore

from helpers import keyword, make_notice
from oracles import floyd_warshall_closure, ref_pmi_edges

IRI = "urn:docukd:onto"


def cls(label, support=(), synonyms=(), provenance=Provenance.LEARNED):
    return OntologyClass(
        iri=class_iri(IRI, label), label=label,
        synonyms=frozenset(synonyms), support=tuple(support),
        provenance=provenance,
    )


class TestSynonyms:
    def test_identical_doc_vectors_are_synonyms(self):
        evidence = {"car": {"d1": 0.5, "d2": 0.3}, "automobile": {"d1": 0.5, "d2": 0.3}}
        assert recognize_synonyms(evidence) == {frozenset(("car", "automobile"))}

    def test_disjoint_documents_are_not_synonyms(self):
        evidence = {"car": {"d1": 0.5}, "turbine": {"d2": 0.5}}
        assert recognize_synonyms(evidence) == set()

    def test_subphrase_pairs_are_excluded(self):
        evidence = {
            "systems": {"d1": 0.3},
            "cognitive systems": {"d1": 0.3},
        }
        assert recognize_synonyms(evidence) == set()

    def test_planted_pair_matches_all_pairs_scan(self):
        rng = random.Random(7)
        terms = {f"t{i}": {f"d{rng.randrange(8)}": rng.random() for _ in range(3)}
                 for i in range(12)}
        terms["automobile"] = {"d1": 0.4, "d2": 0.6}
        terms["car"] = {"d1": 0.4, "d2": 0.6}
        got = recognize_synonyms(terms, threshold=0.8)

        expected = set()
        names = sorted(terms)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                ta, tb = a.split(), b.split()
                subphrase = False
                if len(ta) != len(tb):
                    short, long_ = (ta, tb) if len(ta) < len(tb) else (tb, ta)
                    subphrase = any(
                        long_[k:k + len(short)] == short
                        for k in range(len(long_) - len(short) + 1)
                    )
                if not subphrase and vector_cosine(terms[a], terms[b]) >= 0.8:
                    expected.add(frozenset((a, b)))
        assert got == expected
        assert frozenset(("automobile", "car")) in got

    def test_lexicon_pairs_are_added(self, tmp_path):
        path = tmp_path / "lexicon.tsv"
        path.write_text("car\tautomobile\nboat\tvessel\n")
        pairs = load_lexicon(str(path))
        evidence = {"car": {"d1": 1.0}, "automobile": {"d2": 1.0}}
        got = recognize_synonyms(evidence, threshold=0.99, lexicon_pairs=pairs)
        assert frozenset(("car", "automobile")) in got


class TestConcepts:
    def test_no_pairs_one_class_per_term(self):
        evidence = {"alpha": {"d1": 1.0}, "beta": {"d2": 1.0}}
        classes = generate_concepts(evidence, set(), IRI)
        assert sorted(c.label for c in classes) == ["alpha", "beta"]

    def test_chain_merges_transitively(self):
        evidence = {"a": {"d1": 3.0}, "b": {"d2": 1.0}, "c": {"d3": 2.0}}
        pairs = {frozenset(("a", "b")), frozenset(("b", "c"))}
        classes = generate_concepts(evidence, pairs, IRI)
        assert len(classes) == 1
        only = classes[0]
        assert only.label == "a"  # highest total score
        assert only.synonyms == {"b", "c"}
        assert only.support == ("d1", "d2", "d3")

    def test_label_tie_breaks_lexicographically(self):
        evidence = {"zeta": {"d1": 1.0}, "eta": {"d2": 1.0}}
        classes = generate_concepts(evidence, {frozenset(("zeta", "eta"))}, IRI)
        assert classes[0].label == "eta"

    @settings(max_examples=50)
    @given(st.data())
    def test_partition_matches_connected_components(self, data):
        terms = [f"t{i}" for i in range(8)]
        evidence = {t: {"d0": 1.0} for t in terms}
        pair_list = data.draw(st.lists(
            st.tuples(st.sampled_from(terms), st.sampled_from(terms))
            .filter(lambda p: p[0] != p[1]),
            max_size=10,
        ))
        pairs = {frozenset(p) for p in pair_list}
        classes = generate_concepts(evidence, pairs, IRI)

        # brute-force components by repeated expansion
        components = []
        remaining = set(terms)
        while remaining:
            node = remaining.pop()
            group = {node}
            changed = True
            while changed:
                changed = False
                for pair in pairs:
                    a, b = tuple(pair)
                    if (a in group) != (b in group):
                        group.update((a, b))
                        changed = True
            remaining -= group
            components.append(frozenset(group))
        got = {frozenset({c.label} | set(c.synonyms)) for c in classes}
        assert got == set(components)


class TestRelations:
    def test_is_a_pattern(self):
        classes = [cls("patent", support=("d1",)), cls("document", support=("d2",))]
        subclass, _ = extract_relations(classes, ["A patent is a document."], 2)
        assert subclass == [
            (class_iri(IRI, "patent"), class_iri(IRI, "document"), Provenance.LEARNED)
        ]

    def test_such_as_pattern_direction(self):
        classes = [cls("machinery", support=("d1",)), cls("turbine", support=("d2",))]
        subclass, _ = extract_relations(classes, ["machinery such as turbine"], 2)
        assert subclass == [
            (class_iri(IRI, "turbine"), class_iri(IRI, "machinery"), Provenance.LEARNED)
        ]

    def test_including_pattern_direction(self):
        classes = [cls("propulsion", support=("d1",)), cls("thruster", support=("d2",))]
        subclass, _ = extract_relations(classes, ["propulsion including thruster"], 2)
        assert subclass == [
            (class_iri(IRI, "thruster"), class_iri(IRI, "propulsion"), Provenance.LEARNED)
        ]

    def test_synonym_names_participate(self):
        classes = [
            cls("automobile", support=("d1",), synonyms=("car",)),
            cls("vehicle", support=("d2",)),
        ]
        subclass, _ = extract_relations(classes, ["A car is a vehicle."], 2)
        assert (class_iri(IRI, "automobile"), class_iri(IRI, "vehicle"),
                Provenance.LEARNED) in subclass

    def test_compositional_head(self):
        classes = [cls("cognitive systems", support=("d1",)), cls("systems", support=("d2",))]
        subclass, _ = extract_relations(classes, [], 2)
        assert subclass == [
            (class_iri(IRI, "cognitive systems"), class_iri(IRI, "systems"),
             Provenance.LEARNED)
        ]

    def test_planted_patterns_exactly(self):
        texts = [
            "A sedan is an automobile. The sedan has wheels.",
            "machinery such as turbine appears in plants",
            "propulsion including thruster is regulated",
        ]
        classes = [
            cls("sedan", support=("d0",)), cls("automobile", support=("d0",)),
            cls("machinery", support=("d1",)), cls("turbine", support=("d1",)),
            cls("propulsion", support=("d2",)), cls("thruster", support=("d2",)),
        ]
        subclass, _ = extract_relations(classes, texts, 3, pmi_threshold=99.0)
        assert {(a, b) for a, b, _ in subclass} == {
            (class_iri(IRI, "sedan"), class_iri(IRI, "automobile")),
            (class_iri(IRI, "turbine"), class_iri(IRI, "machinery")),
            (class_iri(IRI, "thruster"), class_iri(IRI, "propulsion")),
        }

    def test_never_cooccurring_classes_have_no_related_edge(self):
        classes = [cls("alpha", support=("d1",)), cls("beta", support=("d2",))]
        _, related = extract_relations(classes, [], 2)
        assert related == []

    def test_pmi_edges_match_oracle(self):
        rng = random.Random(3)
        classes = []
        supports = {}
        for i in range(10):
            docs = {f"d{rng.randrange(6)}" for _ in range(rng.randint(1, 4))}
            c = cls(f"term{i}", support=tuple(sorted(docs)))
            classes.append(c)
            supports[c.iri] = set(docs)
        doc_count = 6
        _, related = extract_relations(classes, [], doc_count, pmi_threshold=1.0)
        got = {(a, b) for a, b, _ in related}
        assert got == ref_pmi_edges(supports, doc_count, 1.0)

    def test_subclass_related_pairs_are_suppressed(self):
        classes = [
            cls("sedan", support=("d1", "d2")),
            cls("automobile", support=("d1", "d2")),
        ]
        texts = ["A sedan is an automobile."]
        subclass, related = extract_relations(classes, texts, 2, pmi_threshold=0.0)
        assert subclass and not related


class TestRules:
    def test_chain_closure(self):
        a, b, c = (class_iri(IRI, x) for x in "abc")
        axioms = [(a, b, Provenance.LEARNED), (b, c, Provenance.LEARNED)]
        assert generate_rules(axioms) == [(a, c, Provenance.INFERRED)]

    def test_already_closed_is_empty(self):
        a, b, c = (class_iri(IRI, x) for x in "abc")
        axioms = [(a, b, Provenance.LEARNED), (b, c, Provenance.LEARNED),
                  (a, c, Provenance.LEARNED)]
        assert generate_rules(axioms) == []

    def test_cycle_detected(self):
        a, b = (class_iri(IRI, x) for x in "ab")
        with pytest.raises(CyclicHierarchy):
            generate_rules([(a, b, Provenance.LEARNED), (b, a, Provenance.LEARNED)])

    def test_closure_matches_floyd_warshall_on_random_dags(self):
        rng = random.Random(11)
        for round_no in range(50):
            n = rng.randint(2, 10)
            nodes = [f"n{i}" for i in range(n)]
            edges = set()
            for i in range(n):
                for j in range(i + 1, n):  # forward edges only: acyclic
                    if rng.random() < 0.3:
                        edges.add((nodes[i], nodes[j]))
            axioms = [(a, b, Provenance.LEARNED) for a, b in sorted(edges)]
            inferred = generate_rules(axioms)
            got = {(a, b) for a, b, _ in inferred}
            expected = floyd_warshall_closure(nodes, edges) - edges
            assert got == expected, f"round {round_no}"

    def test_closure_of_dag_stays_acyclic(self):
        a, b, c, d = (class_iri(IRI, x) for x in "abcd")
        axioms = [(a, b, Provenance.LEARNED), (b, c, Provenance.LEARNED),
                  (c, d, Provenance.LEARNED)]
        closed = axioms + generate_rules(axioms)
        assert generate_rules(closed) == []  # no cycle raised, nothing new


def extraction(doc_id, pairs):
    ordered = sorted((keyword(t, s) for t, s in pairs), key=lambda k: (-k.score, k.term))
    return TermExtractionResult(doc_id=doc_id, keywords=tuple(ordered),
                                algorithm="tfidf-v1")


def feed(service, doc_id, keyword_pairs, text):
    service.ingest(
        extraction(doc_id, keyword_pairs),
        ExtractedText(doc_id=doc_id, text=text, extractor="plain-text-v1"),
    )


class TestLearnPipeline:
    def make_service(self, tmp_path, **kwargs):
        return OntolearnService(DocStore(str(tmp_path)), bus=None, **kwargs)

    def seed(self, service):
        d1, d2, d3 = (new_document_id() for _ in range(3))
        feed(service, d1, [("sedan", 0.9), ("automobile", 0.3)],
             "A sedan is an automobile.")
        feed(service, d2, [("automobile", 0.7), ("motorcar", 0.7)],
             "the automobile motorcar market")
        feed(service, d3, [("automobile", 0.4), ("motorcar", 0.4)],
             "automobile and motorcar comparisons")
        return d1, d2, d3

    def test_empty_evidence_publishes_nothing(self, tmp_path):
        service = self.make_service(tmp_path)
        assert service.learn() is None

    def test_learn_produces_classes_and_axioms(self, tmp_path):
        service = self.make_service(tmp_path)
        self.seed(service)
        ontology = service.learn()
        labels = {c.label for c in ontology.classes}
        assert "sedan" in labels
        assert ontology.version == 1
        assert any(
            sub == class_iri(IRI, "sedan") and sup in
            (class_iri(IRI, "automobile"), class_iri(IRI, "motorcar"))
            for sub, sup, _ in ontology.subclass_axioms
        )

    def test_identical_batches_learn_identical_content(self, tmp_path):
        service = self.make_service(tmp_path)
        self.seed(service)
        first = service.learn()
        second = service.learn()
        assert first.content_key() == second.content_key()
        assert second.version == first.version + 1

    def test_tombstoned_axiom_stays_suppressed(self, tmp_path):
        service = self.make_service(tmp_path)
        self.seed(service)
        published = service.learn()
        assert published.subclass_axioms
        victim = published.subclass_axioms[0]
        revised = Ontology(
            ontology_iri=published.ontology_iri,
            classes=published.classes,
            subclass_axioms=tuple(
                ax for ax in published.subclass_axioms if ax != victim
            ),
            related_axioms=published.related_axioms,
            version=published.version + 1,
            revised_manually=True,
        )
        service.accept_revised(revised)
        relearned = service.learn()
        assert (victim[0], victim[1]) not in {
            (a, b) for a, b, _ in relearned.subclass_axioms
        }
        assert relearned.version > revised.version

    def test_manual_class_and_axiom_survive_relearn(self, tmp_path):
        service = self.make_service(tmp_path)
        self.seed(service)
        published = service.learn()
        manual_cls = OntologyClass(
            iri=class_iri(IRI, "vehicle"), label="vehicle",
            provenance=Provenance.MANUAL,
        )
        existing = published.classes[0].iri
        revised = Ontology(
            ontology_iri=published.ontology_iri,
            classes=published.classes + (manual_cls,),
            subclass_axioms=published.subclass_axioms
            + ((existing, manual_cls.iri, Provenance.MANUAL),),
            related_axioms=published.related_axioms,
            version=published.version + 1,
            revised_manually=True,
        )
        service.accept_revised(revised)
        relearned = service.learn()
        assert manual_cls.iri in {c.iri for c in relearned.classes}
        assert (existing, manual_cls.iri, Provenance.MANUAL) in relearned.subclass_axioms

    def test_no_op_revision_keeps_content(self, tmp_path):
        service = self.make_service(tmp_path)
        self.seed(service)
        published = service.learn()
        service.accept_revised(published)
        relearned = service.learn()
        assert relearned.content_key() == published.content_key()

    def test_ingest_idempotent_by_doc(self, tmp_path):
        service = self.make_service(tmp_path)
        doc = new_document_id()
        feed(service, doc, [("alpha", 0.5)], "alpha text")
        feed(service, doc, [("alpha", 0.5)], "alpha text")
        assert service.pending_since_learn == 1

    def test_debounce_trigger(self, tmp_path):
        service = self.make_service(tmp_path, debounce_secs=1000.0, batch_max=2)
        assert not service.due_for_learn()
        feed(service, new_document_id(), [("alpha", 0.5)], "alpha")
        assert not service.due_for_learn()  # debounce not yet elapsed
        feed(service, new_document_id(), [("beta", 0.5)], "beta")
        assert service.due_for_learn()  # batch_max reached
