"""Deterministic prompt assembly with documented section order and truncation.

Section order: CASE SUMMARY, FINDINGS, TYPOLOGIES, INTEL, MEMORY,
FEEDBACK, INSTRUCTIONS. When the budget is exceeded, entries are dropped
from the back of MEMORY first, then INTEL, then FINDINGS; the summary,
typologies, feedback, and instructions are mandatory. Empty sections are
omitted entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from ..agents.findings import AgentFinding
from ..crimetype.model import TypologyScore
from ..errors import BudgetExceeded
from ..ingestion.model import format_major
from ..ingestion.summary import StructuredSummary
from ..intel.gather import IntelFinding
from ..memory.store import MemoryRecord

INSTRUCTIONS = """Draft the SAR narrative as exactly seven sections, each introduced by a line
'## SECTION <name>' with names: who, what, when, where, how, why, supporting_information.
Write one sentence per line. End every line with an evidence marker:
'[refs: <comma-separated evidence ids>]' citing ids shown in this prompt, or
'[contextual]' for background statements. State amounts and dates exactly as
given in the case summary; never introduce figures from outside this prompt."""


@dataclass(frozen=True)
class FeedbackNote:
    kind: str  # "comment" | "edit"
    section: str
    text: str  # already re-masked


@dataclass(frozen=True)
class PromptInputs:
    case_id: str
    summary: StructuredSummary
    subject_tokens: tuple[str, ...]
    account_tokens: tuple[str, ...]
    findings: tuple[AgentFinding, ...]
    scores: tuple[TypologyScore, ...]
    detected: tuple[str, ...]
    intel: tuple[IntelFinding, ...]
    memory_hits: tuple[MemoryRecord, ...]
    memory_scores: tuple[float, ...] = ()  # retrieval scores, parallel to memory_hits
    feedback: tuple[FeedbackNote, ...] = ()

    def memory_relevance(self) -> dict[str, float]:
        # Retrieval score 2.0 (one shared tag) already counts as fully
        # relevant; the ramp just keeps the value inside [0,1].
        return {
            f"memory:{record.id}": min(1.0, score / 2.0)
            for record, score in zip(self.memory_hits, self.memory_scores)
        }

    def evidence_ids(self) -> set[str]:
        ids = {f.finding_id for f in self.findings}
        ids.update(f.finding_id for f in self.intel)
        ids.update(f"memory:{m.id}" for m in self.memory_hits)
        for score in self.scores:
            ids.update(f"indicator:{i}" for i in score.contributing_indicators)
        return ids


@dataclass(frozen=True)
class Prompt:
    text: str
    inputs: PromptInputs


def money_line(totals: dict[str, int]) -> str:
    parts = []
    for currency in sorted(totals):
        amount = format_major(totals[currency], currency)
        whole, _, cents = amount.partition(".")
        grouped = f"{int(whole):,}"
        rendered = f"${grouped}.{cents}" if cents else f"${grouped}"
        parts.append(f"{rendered} {currency}")
    return "; ".join(parts) if parts else "none"


def _summary_block(inputs: PromptInputs) -> list[str]:
    s = inputs.summary
    lines = [
        "# CASE SUMMARY",
        f"case_id: {inputs.case_id}",
        f"subjects: {'; '.join(inputs.subject_tokens)}",
        f"accounts: {'; '.join(inputs.account_tokens)}",
    ]
    if s.date_range is None:
        lines.append("activity window: no activity")
    else:
        start, end = s.date_range
        lines.append(f"activity window: {start.date().isoformat()} .. {end.date().isoformat()}")
    lines.append(f"total credits: {money_line(s.credit_totals)}")
    lines.append(f"total debits: {money_line(s.debit_totals)}")
    lines.append(f"transaction count: {s.transaction_count}")
    countries = "; ".join(f"{c}:{n}" for c, n in sorted(s.country_counts.items()))
    lines.append(f"countries: {countries or 'none'}")
    return lines


def _findings_block(findings: Sequence[AgentFinding]) -> list[str]:
    return [f"- [{f.finding_id}] ({f.severity}) {f.summary}" for f in findings]


def _typologies_block(inputs: PromptInputs) -> list[str]:
    lines = []
    for score in inputs.scores:
        if score.typology not in inputs.detected:
            continue
        inds = ", ".join(score.contributing_indicators)
        lines.append(
            f"- {score.typology} p={score.probability:.4f} rank={score.rank} indicators: {inds}"
        )
    return lines


def _intel_block(intel: Sequence[IntelFinding]) -> list[str]:
    return [
        f"- [{f.finding_id}] ({f.kind}, relevance {f.relevance:.2f}) {f.content}"
        for f in intel
    ]


def _memory_block(memory: Sequence[MemoryRecord]) -> list[str]:
    return [f"- [memory:{m.id}] ({m.tier}) {m.content}" for m in memory]


def _feedback_block(feedback: Sequence[FeedbackNote]) -> list[str]:
    return [f"- {n.kind} {n.section}: {n.text}" for n in feedback]


def _render(inputs: PromptInputs) -> str:
    blocks: list[list[str]] = [_summary_block(inputs)]
    findings = _findings_block(inputs.findings)
    if findings:
        blocks.append(["# FINDINGS", *findings])
    typologies = _typologies_block(inputs)
    if typologies:
        blocks.append(["# TYPOLOGIES", *typologies])
    intel = _intel_block(inputs.intel)
    if intel:
        blocks.append(["# INTEL", *intel])
    memory = _memory_block(inputs.memory_hits)
    if memory:
        blocks.append(["# MEMORY", *memory])
    feedback = _feedback_block(inputs.feedback)
    if feedback:
        blocks.append(["# FEEDBACK", *feedback])
    blocks.append(["# INSTRUCTIONS", INSTRUCTIONS])
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def build_prompt(inputs: PromptInputs, budget_chars: int) -> Prompt:
    """Render the prompt, trimming optional sections to fit the budget."""
    current = inputs
    while True:
        text = _render(current)
        if len(text) <= budget_chars:
            return Prompt(text=text, inputs=current)
        if current.memory_hits:
            current = replace(
                current,
                memory_hits=current.memory_hits[:-1],
                memory_scores=current.memory_scores[:-1],
            )
        elif current.intel:
            current = replace(current, intel=current.intel[:-1])
        elif current.findings:
            current = replace(current, findings=current.findings[:-1])
        else:
            raise BudgetExceeded(
                f"mandatory prompt sections need {len(text)} chars, budget is {budget_chars}"
            )
