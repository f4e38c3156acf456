"""Pipeline state machine and per-case event log.

The transition graph below is the single source of truth: the runner, the
service, and the model-based fuzz tests all consult it. Every transition
is recorded as an event; the event log doubles as the audit trail and is
exportable as JSON lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any

from ..errors import IllegalTransition

STAGES = (
    "ingested",
    "masked",
    "typed",
    "agents_done",
    "intel_done",
    "drafted",
    "judged",
    "awaiting_review",
    "regenerating",
    "finalized",
    "failed",
)

START = "start"

# (stage, event) -> next stage. "stage_failed" is only wired where the run
# genuinely cannot continue; agent/intel faults are isolated as diagnostics
# instead of transitions.
TRANSITIONS: dict[tuple[str, str], str] = {
    (START, "case_parsed"): "ingested",
    (START, "stage_failed"): "failed",
    ("ingested", "masking_done"): "masked",
    ("ingested", "stage_failed"): "failed",
    ("masked", "typing_done"): "typed",
    ("masked", "stage_failed"): "failed",
    ("typed", "agents_completed"): "agents_done",
    ("agents_done", "intel_completed"): "intel_done",
    ("intel_done", "draft_generated"): "drafted",
    ("intel_done", "stage_failed"): "failed",
    ("drafted", "judge_completed"): "judged",
    ("drafted", "stage_failed"): "failed",
    ("judged", "review_opened"): "awaiting_review",
    ("awaiting_review", "feedback_approved"): "finalized",
    ("awaiting_review", "approve_gate_blocked"): "awaiting_review",
    ("awaiting_review", "regeneration_requested"): "regenerating",
    ("awaiting_review", "cycle_cap_reached"): "awaiting_review",
    ("regenerating", "draft_generated"): "drafted",
    ("regenerating", "stage_failed"): "failed",
}

EVENTS = tuple(sorted({event for _, event in TRANSITIONS}))


@dataclass(frozen=True)
class PipelineEvent:
    seq: int
    event: str
    from_stage: str
    to_stage: str
    at: datetime
    payload: dict[str, Any] = field(default_factory=dict)

    def to_doc(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "event": self.event,
            "from_stage": self.from_stage,
            "to_stage": self.to_stage,
            "at": self.at.isoformat(),
            "payload": dict(self.payload),
        }


@dataclass(frozen=True)
class StageEntry:
    stage: str
    entered_at: datetime
    outcome: str  # "ok" | "failed"
    artifacts: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "entered_at": self.entered_at.isoformat(),
            "outcome": self.outcome,
            "artifacts": list(self.artifacts),
        }


@dataclass
class PipelineState:
    case_id: str
    stage: str = START
    stage_history: list[StageEntry] = field(default_factory=list)
    events: list[PipelineEvent] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    draft_version: int = 0
    regen_cycles: int = 0
    failed_stage: str | None = None
    error: str | None = None

    def apply(self, event: str, at: datetime,
              payload: dict[str, Any] | None = None,
              artifacts: dict[str, str] | None = None) -> None:
        """Transition along the documented graph or raise IllegalTransition."""
        key = (self.stage, event)
        if key not in TRANSITIONS:
            raise IllegalTransition(self.stage, event)
        next_stage = TRANSITIONS[key]
        payload = dict(payload or {})
        if artifacts:
            self.artifacts.update(artifacts)
        self.events.append(
            PipelineEvent(
                seq=len(self.events) + 1,
                event=event,
                from_stage=self.stage,
                to_stage=next_stage,
                at=at,
                payload=payload,
            )
        )
        outcome = "failed" if event == "stage_failed" else "ok"
        if event == "stage_failed":
            self.failed_stage = self.stage if self.stage != START else "ingested"
            self.error = payload.get("error")
        self.stage_history.append(
            StageEntry(
                stage=next_stage,
                entered_at=at,
                outcome=outcome,
                artifacts=tuple(sorted((artifacts or {}).values())),
            )
        )
        self.stage = next_stage

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "stage": self.stage,
            "stage_history": [s.to_doc() for s in self.stage_history],
            "artifacts": dict(sorted(self.artifacts.items())),
            "diagnostics": list(self.diagnostics),
            "draft_version": self.draft_version,
            "regen_cycles": self.regen_cycles,
            "failed_stage": self.failed_stage,
            "error": self.error,
        }

    def export_event_log(self) -> str:
        """Audit trail as JSON lines."""
        return "\n".join(json.dumps(e.to_doc(), sort_keys=True) for e in self.events) + "\n"
