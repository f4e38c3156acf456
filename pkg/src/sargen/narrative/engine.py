"""Draft generation: adapter output parsed into the structured section schema.

The model is never the source of numeric facts: intro fields are
recomputed from the case summary after generation, and any citation of an
id that was not offered in the prompt is a parse failure, not a warning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from typing import Any

from ..agents.findings import AGENT_IDS
from ..errors import ParseFailure
from .adapter import SECTION_ORDER, GenerationParams, LlmAdapter
from .confidence import ChecklistItem, ConfidenceScore, assign_confidence
from .prompt import Prompt

_SECTION_HEADER = re.compile(r"^## SECTION (\w+)\s*$")
_SENTENCE_MARKER = re.compile(r"^(?P<text>.*?)\s*\[(?:refs:\s*(?P<refs>[^\]]*)|(?P<ctx>contextual))\]\s*$")


@dataclass(frozen=True)
class DraftIntro:
    subject_tokens: tuple[str, ...]
    account_tokens: tuple[str, ...]
    activity_start: datetime | None
    activity_end: datetime | None
    credit_totals: dict[str, int]  # currency -> minor units, from summarize_case
    debit_totals: dict[str, int]
    typologies: tuple[str, ...]

    def to_doc(self) -> dict[str, Any]:
        return {
            "subject_tokens": list(self.subject_tokens),
            "account_tokens": list(self.account_tokens),
            "activity_start": self.activity_start.isoformat() if self.activity_start else None,
            "activity_end": self.activity_end.isoformat() if self.activity_end else None,
            "credit_totals": dict(sorted(self.credit_totals.items())),
            "debit_totals": dict(sorted(self.debit_totals.items())),
            "typologies": list(self.typologies),
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "DraftIntro":
        return cls(
            subject_tokens=tuple(doc.get("subject_tokens", [])),
            account_tokens=tuple(doc.get("account_tokens", [])),
            activity_start=(
                datetime.fromisoformat(doc["activity_start"]) if doc.get("activity_start") else None
            ),
            activity_end=(
                datetime.fromisoformat(doc["activity_end"]) if doc.get("activity_end") else None
            ),
            credit_totals=dict(doc.get("credit_totals", {})),
            debit_totals=dict(doc.get("debit_totals", {})),
            typologies=tuple(doc.get("typologies", [])),
        )


@dataclass(frozen=True)
class TraceStep:
    step_id: str
    description: str
    inputs: tuple[str, ...]  # evidence ids
    conclusion: str
    confidence: ConfidenceScore

    def to_doc(self) -> dict[str, Any]:
        return {
            "step_id": self.step_id,
            "description": self.description,
            "inputs": list(self.inputs),
            "conclusion": self.conclusion,
            "confidence": self.confidence.to_doc(),
        }


@dataclass(frozen=True)
class ChainOfThoughtTrace:
    steps: tuple[TraceStep, ...]
    overall_confidence: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "steps": [s.to_doc() for s in self.steps],
            "overall_confidence": self.overall_confidence,
        }


@dataclass(frozen=True)
class NarrativeDraft:
    case_id: str
    draft_version: int
    intro: DraftIntro
    sections: dict[str, tuple[str, ...]]  # section -> sentences (marker stripped)
    citations: dict[str, tuple[tuple[str, ...], ...]]  # per sentence; () == contextual
    trace: ChainOfThoughtTrace

    def section_text(self, name: str) -> str:
        return " ".join(self.sections.get(name, ()))

    def cited_ids(self) -> set[str]:
        return {
            ref
            for per_section in self.citations.values()
            for sentence_refs in per_section
            for ref in sentence_refs
        }

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "draft_version": self.draft_version,
            "intro": self.intro.to_doc(),
            "sections": {k: list(v) for k, v in self.sections.items()},
            "citations": {k: [list(refs) for refs in v] for k, v in self.citations.items()},
            "trace": self.trace.to_doc(),
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "NarrativeDraft":
        from .confidence import ConfidenceScore

        trace_doc = doc.get("trace", {"steps": [], "overall_confidence": 0.0})
        steps = tuple(
            TraceStep(
                step_id=s["step_id"],
                description=s.get("description", ""),
                inputs=tuple(s.get("inputs", [])),
                conclusion=s.get("conclusion", ""),
                confidence=ConfidenceScore(**s["confidence"]),
            )
            for s in trace_doc.get("steps", [])
        )
        # JSON serialization may reorder keys; section order is semantic,
        # so restore the canonical ordering for the known section names.
        raw_sections = doc.get("sections", {})
        raw_citations = doc.get("citations", {})
        ordered = [s for s in SECTION_ORDER if s in raw_sections]
        ordered += [s for s in raw_sections if s not in SECTION_ORDER]
        return cls(
            case_id=doc["case_id"],
            draft_version=int(doc.get("draft_version", 1)),
            intro=DraftIntro.from_doc(doc.get("intro", {})),
            sections={k: tuple(raw_sections[k]) for k in ordered},
            citations={
                k: tuple(tuple(refs) for refs in raw_citations.get(k, ()))
                for k in ordered
                if k in raw_citations
            },
            trace=ChainOfThoughtTrace(
                steps=steps, overall_confidence=trace_doc.get("overall_confidence", 0.0)
            ),
        )


def parse_adapter_output(text: str, known_evidence: set[str]) -> tuple[dict, dict]:
    """Split marker-delimited output into sections + per-sentence citations."""
    sections: dict[str, list[str]] = {}
    citations: dict[str, list[tuple[str, ...]]] = {}
    current: str | None = None
    for line in text.splitlines():
        if not line.strip():
            continue
        header = _SECTION_HEADER.match(line)
        if header:
            name = header.group(1)
            if name not in SECTION_ORDER:
                raise ParseFailure(f"unknown section {name!r}", raw_output=text)
            if name in sections:
                raise ParseFailure(f"duplicate section {name!r}", raw_output=text)
            current = name
            sections[current] = []
            citations[current] = []
            continue
        if current is None:
            raise ParseFailure("output does not start with a section marker", raw_output=text)
        marker = _SENTENCE_MARKER.match(line.strip())
        if marker is None:
            raise ParseFailure(
                f"sentence missing [refs: ...] or [contextual] marker: {line.strip()[:80]!r}",
                raw_output=text,
            )
        refs: tuple[str, ...] = ()
        if marker.group("refs") is not None:
            refs = tuple(r.strip() for r in marker.group("refs").split(",") if r.strip())
            if not refs:
                raise ParseFailure(f"empty refs marker: {line.strip()[:80]!r}", raw_output=text)
            for ref in refs:
                if ref not in known_evidence:
                    raise ParseFailure(
                        f"citation of unknown evidence id {ref!r}", raw_output=text
                    )
        sentence = marker.group("text").strip()
        if sentence:
            sections[current].append(sentence)
            citations[current].append(refs)
    missing = [name for name in SECTION_ORDER if not sections.get(name)]
    if missing:
        raise ParseFailure(f"sections missing or empty: {missing}", raw_output=text)
    return (
        {k: tuple(v) for k, v in sections.items()},
        {k: tuple(v) for k, v in citations.items()},
    )


def _build_trace(prompt: Prompt, sections: dict, citations: dict,
                 checklist: tuple[ChecklistItem, ...]) -> ChainOfThoughtTrace:
    inputs = prompt.inputs
    known = inputs.evidence_ids()
    relevance: dict[str, float] = {f.finding_id: f.relevance for f in inputs.intel}
    relevance.update(inputs.memory_relevance())

    def score(refs, section=None):
        has_intel = section is not None and any(
            ref.startswith("intel:")
            for sentence_refs in citations.get(section, ())
            for ref in sentence_refs
        )
        return assign_confidence(
            refs, known, relevance, checklist,
            section=section,
            section_has_intel_citation=has_intel,
            section_nonempty=section is None or bool(sections.get(section)),
        )

    steps: list[TraceStep] = []
    for typology_score in inputs.scores:
        if typology_score.typology not in inputs.detected:
            continue
        refs = tuple(f"indicator:{i}" for i in typology_score.contributing_indicators)
        if not refs:
            continue
        steps.append(
            TraceStep(
                step_id=f"typology_{typology_score.typology}",
                description=f"weighed extracted risk indicators for {typology_score.typology}",
                inputs=refs,
                conclusion=(
                    f"{typology_score.typology} classified at probability "
                    f"{typology_score.probability:.4f} (rank {typology_score.rank})"
                ),
                confidence=score(refs),
            )
        )
    for agent_id in AGENT_IDS:
        refs = tuple(f.finding_id for f in inputs.findings if f.agent_id == agent_id)
        if not refs:
            continue
        worst = max(
            (f.severity for f in inputs.findings if f.agent_id == agent_id),
            key=lambda s: ("info", "warn", "critical").index(s),
        )
        steps.append(
            TraceStep(
                step_id=f"findings_{agent_id}",
                description=f"reviewed {agent_id} agent output",
                inputs=refs,
                conclusion=f"{len(refs)} finding(s), highest severity {worst}",
                confidence=score(refs),
            )
        )
    if inputs.intel:
        refs = tuple(f.finding_id for f in inputs.intel)
        steps.append(
            TraceStep(
                step_id="intelligence",
                description="incorporated external intelligence lookups",
                inputs=refs,
                conclusion=f"{len(refs)} intelligence item(s) retained after deduplication",
                confidence=score(refs),
            )
        )
    for section in SECTION_ORDER:
        refs: list[str] = []
        for sentence_refs in citations.get(section, ()):
            for ref in sentence_refs:
                if ref not in refs:
                    refs.append(ref)
        if not refs:
            continue
        steps.append(
            TraceStep(
                step_id=f"compose_{section}",
                description=f"composed the {section} section from cited evidence",
                inputs=tuple(refs),
                conclusion=f"{len(sections[section])} sentence(s), {len(refs)} evidence citation(s)",
                confidence=score(tuple(refs), section=section),
            )
        )
    overall = sum(s.confidence.combined for s in steps) / len(steps) if steps else 0.0
    return ChainOfThoughtTrace(steps=tuple(steps), overall_confidence=overall)


def generate_draft(prompt: Prompt, adapter: LlmAdapter,
                   checklist: tuple[ChecklistItem, ...] = (),
                   draft_version: int = 1,
                   params: GenerationParams | None = None) -> NarrativeDraft:
    params = params or GenerationParams()
    text, _usage = adapter.generate(prompt.text, params)
    known = prompt.inputs.evidence_ids()
    sections, citations = parse_adapter_output(text, known)
    summary = prompt.inputs.summary
    start, end = (summary.date_range if summary.date_range else (None, None))
    intro = DraftIntro(
        subject_tokens=prompt.inputs.subject_tokens,
        account_tokens=prompt.inputs.account_tokens,
        activity_start=start,
        activity_end=end,
        credit_totals=dict(summary.credit_totals),
        debit_totals=dict(summary.debit_totals),
        typologies=prompt.inputs.detected,
    )
    trace = _build_trace(prompt, sections, citations, checklist)
    return NarrativeDraft(
        case_id=prompt.inputs.case_id,
        draft_version=draft_version,
        intro=intro,
        sections=sections,
        citations=citations,
        trace=trace,
    )
