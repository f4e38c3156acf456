"""Pipeline runner: sequencing, concurrent agent fan-out with fault
isolation, and the human feedback loop."""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, time, timezone
from typing import Any, Sequence

from ..agents.detectors import run_agent
from ..agents.findings import AgentFinding
from ..crimetype.model import CrimeTypeReport, classify
from ..errors import (
    ConfigMissing,
    SargenError,
    StaleVersion,
    ValidationFailure,
    VersionConflict,
)
from ..ingestion.model import CaseFile
from ..ingestion.parser import parse_alert
from ..ingestion.summary import StructuredSummary, summarize_case
from ..intel.client import McpClient, ServerConfig
from ..intel.gather import DEFAULT_QUERY_PLAN, IntelBatch, gather_intel
from ..judge.judge import JudgeReport, judge
from ..memory.store import MemoryStore, RetrievalQuery
from ..narrative.adapter import LlmAdapter, build_adapter
from ..narrative.confidence import ChecklistItem
from ..narrative.engine import NarrativeDraft, generate_draft
from ..narrative.prompt import FeedbackNote, PromptInputs, build_prompt
from ..narrative.render import SarDocument, render_sar
from ..privacy.masker import mask_case, remask
from ..privacy.recognizer import build_recognizer
from ..privacy.vault import MaskingVault
from ..judge.judge import fetch_checklist
from .planner import AgentPlan, plan
from .state import PipelineState


@dataclass(frozen=True)
class FeedbackEdit:
    section: str
    old_text: str
    new_text: str


@dataclass(frozen=True)
class FeedbackComment:
    location: str  # section name or "general"
    text: str


@dataclass(frozen=True)
class FeedbackItem:
    draft_version: int
    disposition: str  # "approve" | "request_regeneration"
    edits: tuple[FeedbackEdit, ...] = ()
    comments: tuple[FeedbackComment, ...] = ()

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "FeedbackItem":
        if doc.get("disposition") not in ("approve", "request_regeneration"):
            raise ValidationFailure(f"unknown disposition {doc.get('disposition')!r}")
        return cls(
            draft_version=int(doc["draft_version"]),
            disposition=doc["disposition"],
            edits=tuple(
                FeedbackEdit(e["section"], e.get("old_text", ""), e["new_text"])
                for e in doc.get("edits", [])
            ),
            comments=tuple(
                FeedbackComment(c.get("location", "general"), c["text"])
                for c in doc.get("comments", [])
            ),
        )


@dataclass
class PipelineRun:
    """Everything produced for one case: the orchestrator's working set."""

    case: CaseFile
    masked_case: CaseFile
    summary: StructuredSummary
    vault: MaskingVault
    state: PipelineState
    config: dict[str, Any]
    adapter: LlmAdapter
    memory: MemoryStore
    crime_report: CrimeTypeReport | None = None
    agent_plan: AgentPlan | None = None
    findings: tuple[AgentFinding, ...] = ()
    intel: IntelBatch = field(default_factory=lambda: IntelBatch((), ()))
    checklist: tuple[ChecklistItem, ...] = ()
    drafts: dict[int, NarrativeDraft] = field(default_factory=dict)
    reports: dict[int, JudgeReport] = field(default_factory=dict)
    prompts: dict[int, str] = field(default_factory=dict)
    feedback_notes: tuple[FeedbackNote, ...] = ()
    final_draft: NarrativeDraft | None = None
    intel_clients: list[McpClient] = field(default_factory=list)
    recognizer: Any = None
    _feedback_lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def clock(self) -> datetime:
        """Deterministic per-case instant for artifact timestamps."""
        if self.config.get("pipeline", {}).get("deterministic_clock", True):
            if self.case.alert_meta is not None:
                return datetime.combine(
                    self.case.alert_meta.detection_date, time(0, 0), tzinfo=timezone.utc
                )
            if self.case.transactions:
                return self.case.transactions[-1].timestamp
            return datetime(2000, 1, 1, tzinfo=timezone.utc)
        return datetime.now(timezone.utc)

    def draft(self, version: int | None = None) -> NarrativeDraft | None:
        if version is None:
            version = self.state.draft_version
        return self.drafts.get(version)

    def report(self, version: int | None = None) -> JudgeReport | None:
        if version is None:
            version = self.state.draft_version
        return self.reports.get(version)

    def render(self, version: int | None = None) -> SarDocument:
        draft = self.final_draft if version is None and self.final_draft else self.draft(version)
        if draft is None:
            raise ValidationFailure("no draft available to render")
        return render_sar(draft, self.case, self.vault, self.config)

    def known_person_tokens(self) -> set[str]:
        return {e.token for e in self.vault.originals() if e.category == "PERSON"}


def seed_memory(memory: MemoryStore, seed: Sequence[dict[str, Any]], at: datetime) -> None:
    """Idempotently load the packaged regulatory/typology seed records."""
    for row in seed:
        if memory.get(row["id"]) is None:
            memory.put(
                row["id"], row["tier"], row.get("key", row["id"]), row["content"],
                set(row.get("tags", [])), now=at,
            )


def _spawn_agents(run: PipelineRun, agent_plan: AgentPlan) -> tuple[tuple[AgentFinding, ...], list[str]]:
    """Fan out concurrently; one agent's failure becomes a diagnostic, never a cascade."""
    agents_config = run.config.get("agents", {})
    results: dict[str, list[AgentFinding]] = {}
    diagnostics: list[str] = []

    def invoke(agent_id: str) -> tuple[str, list[AgentFinding] | Exception]:
        try:
            return agent_id, run_agent(agent_id, run.masked_case, agents_config)
        except Exception as exc:  # isolation boundary
            return agent_id, exc

    with ThreadPoolExecutor(max_workers=max(1, len(agent_plan.agents_to_spawn))) as pool:
        for agent_id, outcome in pool.map(invoke, agent_plan.agents_to_spawn):
            if isinstance(outcome, Exception):
                diagnostics.append(f"agent {agent_id} failed: {type(outcome).__name__}: {outcome}")
            else:
                results[agent_id] = outcome
    merged: list[AgentFinding] = []
    for agent_id in agent_plan.agents_to_spawn:  # agent-enum order for determinism
        merged.extend(results.get(agent_id, []))
    return tuple(merged), diagnostics


def _intel_clients(config: dict[str, Any]) -> list[McpClient]:
    intel_cfg = config.get("intel", {})
    clients = []
    for row in intel_cfg.get("servers", []):
        clients.append(
            McpClient(
                ServerConfig.from_doc(row),
                timeout_s=intel_cfg.get("timeout_s", 10.0),
                retries=intel_cfg.get("retries", 1),
            )
        )
    return clients


def _prompt_inputs(run: PipelineRun, feedback: tuple[FeedbackNote, ...]) -> PromptInputs:
    detected = run.crime_report.detected if run.crime_report else ()
    scores = run.crime_report.scores if run.crime_report else ()
    narrative_cfg = run.config.get("narrative", {})
    memory_hits: list = []
    memory_scores: list[float] = []
    if detected:
        hits = run.memory.query(
            RetrievalQuery(
                tier="typology_specific",
                tags=frozenset({detected[0]}),
                k=narrative_cfg.get("memory_k_typology", 3),
            )
        )
        # Only tag-matched guidance belongs in the prompt; zero-score
        # records are top-k filler from an unrelated typology.
        memory_hits.extend(r for r, s in hits if s > 0)
        memory_scores.extend(s for _, s in hits if s > 0)
    style_hits = run.memory.query(
        RetrievalQuery(tier="historical_narrative", tags=frozenset(),
                       k=narrative_cfg.get("memory_k_historical", 2))
    )
    memory_hits.extend(r for r, _ in style_hits)
    memory_scores.extend(s for _, s in style_hits)
    subject_tokens = tuple(s.name for s in run.masked_case.subjects)
    account_tokens = tuple(a.id for a in run.masked_case.accounts)
    return PromptInputs(
        case_id=run.case.case_id,
        summary=run.summary,
        subject_tokens=subject_tokens,
        account_tokens=account_tokens,
        findings=run.findings,
        scores=tuple(scores),
        detected=tuple(detected),
        intel=run.intel.findings,
        memory_hits=tuple(memory_hits),
        memory_scores=tuple(memory_scores),
        feedback=feedback,
    )


def _generate_and_judge(run: PipelineRun, version: int) -> None:
    narrative_cfg = run.config.get("narrative", {})
    inputs = _prompt_inputs(run, run.feedback_notes)
    prompt = build_prompt(inputs, narrative_cfg.get("max_prompt_chars", 60000))
    run.prompts[version] = prompt.text
    draft = generate_draft(prompt, run.adapter, run.checklist, draft_version=version)
    run.drafts[version] = draft
    run.state.draft_version = version
    run.state.apply(
        "draft_generated", run.clock,
        payload={"version": version},
        artifacts={"prompt": f"prompt@{version}", "draft": f"draft@{version}"},
    )
    report = judge(
        draft,
        run.masked_case,
        run.findings,
        run.crime_report.detected if run.crime_report else (),
        run.memory,
        adapter=run.adapter,
        intel_present=bool(run.intel.findings),
        known_person_tokens=run.known_person_tokens(),
        now=run.clock,
    )
    run.reports[version] = report
    run.state.apply(
        "judge_completed", run.clock,
        payload={"verdict": report.verdict, "version": version},
        artifacts={"judge_report": f"judge_report@{version}"},
    )


def run_pipeline(case_input: bytes | CaseFile, config: dict[str, Any],
                 memory: MemoryStore | None = None,
                 adapter: LlmAdapter | None = None) -> PipelineRun:
    """Execute ingestion through judging; terminal stage is awaiting_review
    (or failed, for ingestion/masking faults)."""
    memory = memory if memory is not None else MemoryStore(config.get("memory", {}).get("path"))
    adapter = adapter if adapter is not None else build_adapter(
        config.get("narrative", {}).get("adapter", {"kind": "mock"})
    )

    probe_state = PipelineState(case_id="(unparsed)")
    try:
        case = case_input if isinstance(case_input, CaseFile) else parse_alert(case_input, "json")
    except SargenError as exc:
        probe_state.apply("stage_failed", datetime.now(timezone.utc),
                          payload={"error": f"{type(exc).__name__}: {exc}"})
        raise PipelineAborted(probe_state, exc) from exc

    state = PipelineState(case_id=case.case_id)
    vault = MaskingVault(case.case_id)
    summary = summarize_case(case)
    run = PipelineRun(
        case=case,
        masked_case=case,  # replaced after masking
        summary=summary,
        vault=vault,
        state=state,
        config=config,
        adapter=adapter,
        memory=memory,
    )
    state.apply("case_parsed", run.clock, artifacts={"case": f"case@{case.case_id}",
                                                     "summary": "summary@1"})
    seed_memory(memory, config.get("memory", {}).get("seed", []), run.clock)

    try:
        recognizer = build_recognizer("rules", case)
        threshold = config.get("privacy", {}).get("mask_threshold", 0.5)
        run.masked_case = mask_case(case, vault, recognizer, threshold)
        run.recognizer = recognizer
    except SargenError as exc:
        state.apply("stage_failed", run.clock, payload={"error": f"{type(exc).__name__}: {exc}"})
        raise PipelineAborted(state, exc) from exc
    state.apply("masking_done", run.clock, artifacts={"masked_case": "masked_case@1",
                                                      "vault": "vault@1"})

    crimetype_cfg = config.get("crimetype", {})
    try:
        run.crime_report = classify(
            run.masked_case,
            crimetype_cfg.get("registry", {}),
            crimetype_cfg.get("model", {}),
            crimetype_cfg.get("activation_threshold", 0.35),
        )
    except SargenError as exc:
        run.state.diagnostics.append(f"crime typing degraded: {type(exc).__name__}: {exc}")
        run.crime_report = CrimeTypeReport(
            case_id=case.case_id, indicators=(), scores=(), detected=(),
            model_version="unavailable", registry_version="unavailable",
        )
    state.apply("typing_done", run.clock,
                payload={"detected": list(run.crime_report.detected)},
                artifacts={"crime_report": "crime_report@1"})

    agent_plan = plan(run.crime_report, run.masked_case, config.get("pipeline", {}))
    run.agent_plan = agent_plan
    findings, diagnostics = _spawn_agents(run, agent_plan)
    run.findings = findings
    state.diagnostics.extend(diagnostics)
    state.apply("agents_completed", run.clock,
                payload={"agents": list(agent_plan.agents_to_spawn),
                         "finding_count": len(findings)},
                artifacts={"findings": "findings@1"})

    if agent_plan.intel_queries_enabled:
        run.intel_clients = _intel_clients(config)
        try:
            run.intel = gather_intel(
                tuple(s.name for s in run.masked_case.subjects),
                run.crime_report.detected,
                run.intel_clients,
                plan=config.get("intel", {}).get("plan", DEFAULT_QUERY_PLAN),
                cap=config.get("intel", {}).get("cap", 5),
                now=run.clock,
            )
        finally:
            for client in run.intel_clients:
                client.close()
        state.diagnostics.extend(run.intel.diagnostics)
    else:
        run.intel = IntelBatch((), ("intel disabled: no typology detected",))
    state.apply("intel_completed", run.clock,
                payload={"finding_count": len(run.intel.findings)},
                artifacts={"intel": "intel@1"})

    run.checklist = fetch_checklist(
        memory, run.crime_report.detected[0] if run.crime_report.detected else None
    )
    try:
        _generate_and_judge(run, version=1)
    except SargenError as exc:
        state.apply("stage_failed", run.clock, payload={"error": f"{type(exc).__name__}: {exc}"})
        raise PipelineAborted(state, exc) from exc
    state.apply("review_opened", run.clock)
    return run


class PipelineAborted(SargenError):
    """Raised when ingestion/masking/generation faults abort the run; carries
    the failed state for persistence."""

    def __init__(self, state: PipelineState, cause: Exception) -> None:
        self.state = state
        self.cause = cause
        super().__init__(f"pipeline failed at {state.failed_stage}: {cause}")


def _remask_text(run: PipelineRun, text: str) -> str:
    recognizer = run.recognizer or build_recognizer("rules", run.case)
    threshold = run.config.get("privacy", {}).get("mask_threshold", 0.5)
    return remask(text, run.vault, recognizer, threshold).text


def _apply_edits_to_draft(run: PipelineRun, draft: NarrativeDraft,
                          edits: tuple[FeedbackEdit, ...]) -> NarrativeDraft:
    sections = {k: list(v) for k, v in draft.sections.items()}
    citations = {k: list(v) for k, v in draft.citations.items()}
    for edit in edits:
        if edit.section not in sections:
            raise ValidationFailure(f"edit references unknown section {edit.section!r}")
        masked = _remask_text(run, edit.new_text)
        sections[edit.section] = [masked]
        citations[edit.section] = [()]
    return NarrativeDraft(
        case_id=draft.case_id,
        draft_version=draft.draft_version,
        intro=draft.intro,
        sections={k: tuple(v) for k, v in sections.items()},
        citations={k: tuple(v) for k, v in citations.items()},
        trace=draft.trace,
    )


def apply_feedback(run: PipelineRun, item: FeedbackItem) -> PipelineState:
    """Approve or regenerate; stale versions are rejected, first writer wins."""
    state = run.state
    if state.stage != "awaiting_review":
        raise ValidationFailure(f"feedback not accepted in stage {state.stage!r}")
    if item.draft_version != state.draft_version:
        raise StaleVersion(
            f"feedback targets draft v{item.draft_version}, current is v{state.draft_version}"
        )
    with run._feedback_lock:
        if item.draft_version != state.draft_version or state.stage != "awaiting_review":
            raise VersionConflict(
                f"draft advanced to v{state.draft_version} while feedback was in flight"
            )
        if item.disposition == "approve":
            draft = run.drafts[state.draft_version]
            edited = _apply_edits_to_draft(run, draft, item.edits)
            gate = judge(
                edited,
                run.masked_case,
                run.findings,
                run.crime_report.detected if run.crime_report else (),
                run.memory,
                adapter=run.adapter,
                intel_present=bool(run.intel.findings),
                known_person_tokens=run.known_person_tokens(),
                now=run.clock,
            )
            run.reports[state.draft_version] = gate
            if gate.verdict == "block":
                state.diagnostics.append(
                    f"approve gate blocked draft v{state.draft_version}: "
                    f"{len(gate.flags)} flag(s)"
                )
                state.apply("approve_gate_blocked", run.clock,
                            payload={"verdict": gate.verdict})
                return state
            run.final_draft = edited
            state.apply("feedback_approved", run.clock,
                        payload={"version": state.draft_version},
                        artifacts={"final_draft": f"final_draft@{state.draft_version}"})
            return state

        # request_regeneration
        max_cycles = run.config.get("pipeline", {}).get("max_regen_cycles", 5)
        if state.regen_cycles >= max_cycles:
            state.diagnostics.append(
                f"regeneration cap ({max_cycles}) reached; draft v{state.draft_version} "
                "held for review"
            )
            state.apply("cycle_cap_reached", run.clock)
            return state
        notes = list(run.feedback_notes)
        for edit in item.edits:
            notes.append(
                FeedbackNote(kind="edit", section=edit.section,
                             text=_remask_text(run, edit.new_text))
            )
        for comment in item.comments:
            section = comment.location if comment.location in run.drafts[state.draft_version].sections else _section_from_text(comment.text)
            notes.append(
                FeedbackNote(kind="comment", section=section,
                             text=_remask_text(run, comment.text))
            )
        run.feedback_notes = tuple(notes)
        state.regen_cycles += 1
        state.apply("regeneration_requested", run.clock,
                    payload={"cycle": state.regen_cycles})
        _generate_and_judge(run, version=state.draft_version + 1)
        state.apply("review_opened", run.clock)
        return state


def _section_from_text(text: str) -> str:
    lowered = text.lower()
    for name in ("supporting_information", "who", "what", "when", "where", "how", "why"):
        if name in lowered:
            return name
    return "supporting_information"
