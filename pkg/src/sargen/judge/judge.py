"""Agent-as-a-judge: structured validation of a draft against case facts,
agent findings, regulatory memory, and coherence heuristics.

The judge is read-only and never edits the draft; flags go to the
feedback loop for a human decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Sequence

from ..agents.findings import AgentFinding
from ..errors import AdapterFailure
from ..ingestion.model import CaseFile
from ..memory.store import MemoryStore, RetrievalQuery
from ..narrative.adapter import GenerationParams, LlmAdapter
from ..narrative.confidence import ChecklistItem, parse_checklist
from ..narrative.engine import NarrativeDraft
from .checks import (
    ValidationFlag,
    coherence_heuristics,
    verify_coverage,
    verify_facts,
    verify_regulatory,
)

VERDICTS = ("pass", "needs_review", "block")


@dataclass(frozen=True)
class JudgeReport:
    case_id: str
    draft_version: int
    flags: tuple[ValidationFlag, ...]
    checks_run: tuple[tuple[str, bool], ...]  # (check name, passed)
    verdict: str
    judged_at: datetime
    diagnostics: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "draft_version": self.draft_version,
            "flags": [f.to_doc() for f in self.flags],
            "checks_run": [{"name": n, "passed": p} for n, p in self.checks_run],
            "verdict": self.verdict,
            "judged_at": self.judged_at.isoformat(),
            "diagnostics": list(self.diagnostics),
        }


def verdict_for(flags: Sequence[ValidationFlag]) -> str:
    """Pure function of the flag multiset."""
    if any(f.severity == "block" for f in flags):
        return "block"
    if any(f.severity == "warn" for f in flags):
        return "needs_review"
    return "pass"


def fetch_checklist(memory: MemoryStore, typology: str | None) -> tuple[ChecklistItem, ...]:
    tags = frozenset({typology}) if typology else frozenset()
    hits = memory.query(RetrievalQuery(tier="regulatory", tags=tags, k=32))
    return parse_checklist([record for record, _ in hits])


def _coherence_via_adapter(draft: NarrativeDraft, adapter: LlmAdapter) -> list[ValidationFlag]:
    prompt = (
        "Assess the semantic coherence of this SAR narrative. Respond with the single "
        "word COHERENT or INCOHERENT.\n\n"
        + "\n\n".join(f"[{name}] {draft.section_text(name)}" for name in draft.sections)
    )
    text, _ = adapter.generate(prompt, GenerationParams(max_length=16, temperature=0.0, seed=0))
    if "INCOHERENT" in text.upper():
        return [
            ValidationFlag(
                kind="coherence",
                severity="warn",
                section=None,
                sentence_index=None,
                expected="semantically coherent narrative",
                found="adapter judged the narrative incoherent",
            )
        ]
    return []


def judge(
    draft: NarrativeDraft,
    case: CaseFile,
    findings: Sequence[AgentFinding],
    detected: Sequence[str],
    memory: MemoryStore,
    adapter: LlmAdapter | None = None,
    intel_present: bool = False,
    known_person_tokens: set[str] | None = None,
    now: datetime | None = None,
) -> JudgeReport:
    """Run every check and fold the flags into a verdict.

    Adapter failures degrade the coherence check to heuristics-only with a
    diagnostic; the rule-based checks always run.
    """
    flags: list[ValidationFlag] = []
    checks: list[tuple[str, bool]] = []
    diagnostics: list[str] = []

    fact_flags = verify_facts(draft, case, findings, known_person_tokens)
    checks.append(("facts", not fact_flags))
    flags.extend(fact_flags)

    coverage_flags = verify_coverage(draft, findings, detected)
    checks.append(("coverage", not coverage_flags))
    flags.extend(coverage_flags)

    top = detected[0] if detected else None
    checklist = fetch_checklist(memory, top)
    regulatory_flags = verify_regulatory(draft, checklist, intel_present)
    checks.append(("regulatory", not regulatory_flags))
    flags.extend(regulatory_flags)

    heuristic_flags = coherence_heuristics(draft)
    checks.append(("coherence_heuristic", not heuristic_flags))
    flags.extend(heuristic_flags)

    if adapter is not None and not adapter.capabilities.deterministic:
        try:
            llm_flags = _coherence_via_adapter(draft, adapter)
            checks.append(("coherence_llm", not llm_flags))
            flags.extend(llm_flags)
        except AdapterFailure as exc:
            checks.append(("coherence_llm", True))
            diagnostics.append(f"coherence check degraded to heuristics: {exc}")

    return JudgeReport(
        case_id=draft.case_id,
        draft_version=draft.draft_version,
        flags=tuple(flags),
        checks_run=tuple(checks),
        verdict=verdict_for(flags),
        judged_at=now or datetime.now(timezone.utc),
        diagnostics=tuple(diagnostics),
    )
