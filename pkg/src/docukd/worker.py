"""Common request/reply shape for the pipeline worker services."""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional

from .clients import BusClient
from .errors import DocukdError
from .model import PipelineStepRequest, Step, StepReply
from .msgbus.broker import MessageEnvelope


class StepWorker:
    """Consumes step requests, computes idempotently, reports the outcome.

    Business failures become error replies (the orchestrator fails the
    document); unexpected exceptions propagate so the delivery is nacked and
    retried by the bus.
    """

    step: Step
    reply_queue: str

    def __init__(self, bus: Optional[BusClient]) -> None:
        self.bus = bus
        self.log = logging.getLogger(f"docukd.worker.{self.step.value}")

    def process(self, request: PipelineStepRequest) -> Dict[str, Any]:
        raise NotImplementedError

    def handle(self, envelope: MessageEnvelope) -> None:
        request = PipelineStepRequest.from_dict(envelope.payload)
        if request.step is not self.step:
            self.log.warning("ignoring %s request on %s queue",
                             request.step.value, self.step.value)
            return
        try:
            output = self.process(request)
            reply = StepReply(doc_id=request.doc_id, step=self.step, ok=True, output=output)
        except DocukdError as exc:
            self.log.info("step %s failed for %s: %s",
                          self.step.value, request.doc_id, exc.message)
            reply = StepReply(
                doc_id=request.doc_id, step=self.step, ok=False,
                error=f"{exc.code}: {exc.message}",
            )
        self.bus.publish(self.reply_queue, request.doc_id, "StepReply", reply.to_dict())
