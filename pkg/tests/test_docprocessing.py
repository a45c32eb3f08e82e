"""Orchestrator: upload validation, state machine, reply dedup, retry,
completion fan-out, crash recovery via replay."""

import pytest

from docukd.docprocessing.orchestrator import Orchestrator
from docukd.errors import (
    EmptyDocument,
    NotFailed,
    UnknownDocument,
    UnsupportedMediaType,
)
from docukd.model import (
    DocState,
    ExtractedText,
    Step,
    StepReply,
    new_document_id,
)
from docukd.msgbus.broker import TOPOLOGY, Broker, bootstrap_topology
from docukd.store import DocStore

from helpers import LocalBus, keyword


@pytest.fixture
def bus(tmp_path):
    broker = Broker(str(tmp_path / "bus"))
    bootstrap_topology(broker)
    return LocalBus(broker)


@pytest.fixture
def orchestrator(tmp_path, bus):
    return Orchestrator(DocStore(str(tmp_path / "docproc")), bus)


def drain(bus, queue):
    """Consume and ack everything currently on a queue."""
    out = []
    while True:
        got = bus.poll(queue, "test")
        if got is None:
            return out
        tag, envelope = got
        bus.ack(tag)
        out.append(envelope)


def extracted_output(doc_id, text="alpha beta gamma"):
    return ExtractedText(doc_id=doc_id, text=text, extractor="plain-text-v1").to_dict()


def keywords_output(doc_id):
    return {
        "doc_id": doc_id,
        "keywords": [keyword("alpha", 0.5).to_dict()],
        "algorithm": "tfidf-v1",
    }


def sim_output(doc_id):
    return {"similarities": []}


def run_step(orchestrator, doc_id, step, output):
    return orchestrator.advance_on_reply(
        StepReply(doc_id=doc_id, step=step, ok=True, output=output)
    )


def complete_pipeline(orchestrator, doc_id):
    run_step(orchestrator, doc_id, Step.PREPROCESS, extracted_output(doc_id))
    run_step(orchestrator, doc_id, Step.TERM_EXTRACT, keywords_output(doc_id))
    return run_step(orchestrator, doc_id, Step.SIM_COMPUTE, sim_output(doc_id))


class TestUpload:
    def test_upload_returns_id_and_publishes_first_step(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"cognitive systems")
        assert orchestrator.get_status(doc_id).state is DocState.PREPROCESSING
        requests = drain(bus, "q.preprocessing.req")
        assert len(requests) == 1
        assert requests[0].payload["doc_id"] == doc_id

    def test_unsupported_media_type(self, orchestrator):
        with pytest.raises(UnsupportedMediaType):
            orchestrator.upload_document("a.bin", "application/octet-stream", b"x")

    def test_empty_document(self, orchestrator):
        with pytest.raises(EmptyDocument):
            orchestrator.upload_document("a.txt", "text/plain", b"")

    def test_media_type_parameters_are_stripped(self, orchestrator):
        doc_id = orchestrator.upload_document(
            "a.txt", "text/plain; charset=utf-8", b"x"
        )
        assert orchestrator.get_record(doc_id).media_type == "text/plain"

    def test_unknown_document_status(self, orchestrator):
        with pytest.raises(UnknownDocument):
            orchestrator.get_status(new_document_id())

    def test_listing_pages(self, orchestrator):
        ids = [
            orchestrator.upload_document(f"{i}.txt", "text/plain", b"x")
            for i in range(5)
        ]
        page = orchestrator.list_documents(offset=1, limit=2)
        assert len(page) == 2
        everything = orchestrator.list_documents(limit=50)
        assert {m["doc_id"] for m in everything} == set(ids)


class TestAdvance:
    def test_preprocess_reply_advances_and_publishes_next(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        action = run_step(orchestrator, doc_id, Step.PREPROCESS, extracted_output(doc_id))
        assert action == "advanced"
        assert orchestrator.get_status(doc_id).state is DocState.EXTRACTING_TERMS
        requests = drain(bus, "q.termextraction.req")
        assert len(requests) == 1
        assert requests[0].payload["input_payload"]["text"] == "alpha beta gamma"

    def test_full_pipeline_completes_and_fans_out(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        action = complete_pipeline(orchestrator, doc_id)
        assert action == "completed"
        assert orchestrator.get_status(doc_id).state is DocState.COMPLETED
        for queue in ("q.searching.ingest", "q.nli.ingest"):
            notices = drain(bus, queue)
            assert len(notices) == 1
            assert notices[0].payload["doc_id"] == doc_id
            assert notices[0].payload["filename"] == "a.txt"
        learn = drain(bus, "q.ontolearn.ingest")
        assert len(learn) == 1
        assert learn[0].payload["extracted_text"]["text"] == "alpha beta gamma"

    def test_duplicate_reply_is_ignored(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        run_step(orchestrator, doc_id, Step.PREPROCESS, extracted_output(doc_id))
        run_step(orchestrator, doc_id, Step.TERM_EXTRACT, keywords_output(doc_id))
        first = run_step(orchestrator, doc_id, Step.SIM_COMPUTE, sim_output(doc_id))
        second = run_step(orchestrator, doc_id, Step.SIM_COMPUTE, sim_output(doc_id))
        assert (first, second) == ("completed", "duplicate")
        assert len(drain(bus, "q.searching.ingest")) == 1
        assert len(drain(bus, "q.nli.ingest")) == 1
        assert len(drain(bus, "q.ontolearn.ingest")) == 1

    def test_out_of_order_reply_is_stale(self, orchestrator):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        action = run_step(orchestrator, doc_id, Step.TERM_EXTRACT,
                          keywords_output(doc_id))
        assert action == "stale"
        assert orchestrator.get_status(doc_id).state is DocState.PREPROCESSING

    def test_reply_for_unknown_document_is_stale(self, orchestrator):
        reply = StepReply(doc_id=new_document_id(), step=Step.PREPROCESS,
                          ok=True, output={})
        assert orchestrator.advance_on_reply(reply) == "stale"

    def test_error_reply_fails_document(self, orchestrator):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        action = orchestrator.advance_on_reply(StepReply(
            doc_id=doc_id, step=Step.PREPROCESS, ok=False,
            error="EmptyText: empty extraction",
        ))
        assert action == "failed"
        status = orchestrator.get_status(doc_id)
        assert status.state is DocState.FAILED
        assert status.failed_step is Step.PREPROCESS
        assert "empty extraction" in status.reason


class TestRetry:
    def fail_once(self, orchestrator, doc_id, step=Step.PREPROCESS):
        orchestrator.advance_on_reply(StepReply(
            doc_id=doc_id, step=step, ok=False, error="worker exploded",
        ))

    def test_retry_republishes_failed_step(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        drain(bus, "q.preprocessing.req")
        self.fail_once(orchestrator, doc_id)
        status = orchestrator.retry_failed(doc_id)
        assert status.state is DocState.PREPROCESSING
        assert status.attempts["Preprocess"] == 2
        assert len(drain(bus, "q.preprocessing.req")) == 1

    def test_retry_then_success_completes(self, orchestrator, bus):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        self.fail_once(orchestrator, doc_id)
        orchestrator.retry_failed(doc_id)
        assert complete_pipeline(orchestrator, doc_id) == "completed"

    def test_retry_on_completed_is_not_failed(self, orchestrator):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        complete_pipeline(orchestrator, doc_id)
        with pytest.raises(NotFailed):
            orchestrator.retry_failed(doc_id)

    def test_retry_limit_keeps_document_failed(self, orchestrator):
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        for _ in range(2):  # attempts reach the default limit of 3
            self.fail_once(orchestrator, doc_id)
            orchestrator.retry_failed(doc_id)
        self.fail_once(orchestrator, doc_id)
        status = orchestrator.retry_failed(doc_id)
        assert status.state is DocState.FAILED
        assert status.reason == "retry limit"


class FakeReplayRegistry:
    """Pretends to be a registry + worker: serves replay results directly."""

    def __init__(self, results):
        self.results = results  # (service) -> {doc_id: payload}

    def resolve_address(self, service):
        return f"stub://{service}"


class TestRecovery:
    def test_recover_pending_republishes_for_unprocessed_doc(self, tmp_path, bus):
        store = DocStore(str(tmp_path / "docproc"))
        orchestrator = Orchestrator(store, bus)
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")
        drain(bus, "q.preprocessing.req")

        # simulate restart: new orchestrator over the same store
        reborn = Orchestrator(store, bus)
        actions = reborn.recover_pending()
        assert actions[doc_id] == "republished Preprocess"
        assert len(drain(bus, "q.preprocessing.req")) == 1

    def test_recover_uses_replay_when_worker_has_result(self, tmp_path, bus,
                                                        monkeypatch):
        store = DocStore(str(tmp_path / "docproc"))
        orchestrator = Orchestrator(store, bus)
        doc_id = orchestrator.upload_document("a.txt", "text/plain", b"text")

        reborn = Orchestrator(store, bus)
        monkeypatch.setattr(
            reborn, "recover_step",
            lambda d, s: extracted_output(d) if s is Step.PREPROCESS else {},
        )
        actions = reborn.recover_pending()
        assert actions[doc_id] == "replayed Preprocess"
        assert reborn.get_status(doc_id).state is DocState.EXTRACTING_TERMS
        # the replayed output feeds the normal workflow: next request published
        assert len(drain(bus, "q.termextraction.req")) == 1

    def test_recovered_run_matches_uninterrupted_run(self, tmp_path):
        bus_a = LocalBus(self._booted_broker(tmp_path / "busA"))
        bus_b = LocalBus(self._booted_broker(tmp_path / "busB"))
        control = Orchestrator(DocStore(str(tmp_path / "control")), bus_a)
        crashed_store = DocStore(str(tmp_path / "crashed"))
        crashed = Orchestrator(crashed_store, bus_b)

        content = b"identical document content"
        control_id = control.upload_document("a.txt", "text/plain", content)
        crashed_id = crashed.upload_document("a.txt", "text/plain", content)

        complete_pipeline(control, control_id)

        # crash after preprocessing persisted; restart replays then finishes
        run_step(crashed, crashed_id, Step.PREPROCESS, extracted_output(crashed_id, "x"))
        reborn = Orchestrator(crashed_store, bus_b)
        reborn.recover_pending()
        run_step(reborn, crashed_id, Step.TERM_EXTRACT, keywords_output(crashed_id))
        run_step(reborn, crashed_id, Step.SIM_COMPUTE, sim_output(crashed_id))

        control_status = control.get_status(control_id)
        crashed_status = reborn.get_status(crashed_id)
        assert control_status.state is crashed_status.state is DocState.COMPLETED

    @staticmethod
    def _booted_broker(path):
        broker = Broker(str(path))
        bootstrap_topology(broker)
        return broker


class TestTopologyInvariant:
    def test_no_queue_targets_querying_parent(self):
        assert all("querying" not in name for name in TOPOLOGY)
