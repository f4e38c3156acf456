"""Rule-based validation checks the judge runs against a draft."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from typing import Any, Sequence

from ..agents.findings import AgentFinding
from ..crimetype.model import TYPOLOGIES
from ..ingestion.model import CaseFile, format_major
from ..narrative.adapter import SECTION_ORDER
from ..narrative.confidence import ChecklistItem
from ..narrative.engine import NarrativeDraft

FLAG_KINDS = (
    "amount_mismatch",
    "date_mismatch",
    "subject_mismatch",
    "uncovered_finding",
    "unsupported_claim",
    "missing_section",
    "regulatory_gap",
    "coherence",
)

# Documented grammar: $#,###.## amounts; ISO and "Month D, YYYY" dates.
_AMOUNT = re.compile(r"\$(\d{1,3}(?:,\d{3})*|\d+)(?:\.(\d{2}))?")
_ISO_DATE = re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")
_MONTH_DATE = re.compile(
    r"\b(January|February|March|April|May|June|July|August|September|October|November|December)"
    r" (\d{1,2}), (\d{4})\b"
)
_MONTHS = {
    name: i + 1
    for i, name in enumerate(
        ["January", "February", "March", "April", "May", "June", "July",
         "August", "September", "October", "November", "December"]
    )
}
_PERSON_TOKEN = re.compile(r"\[\[PERSON_\d+\]\]")


@dataclass(frozen=True)
class ValidationFlag:
    kind: str
    severity: str  # warn | block
    section: str | None
    sentence_index: int | None
    expected: str
    found: str
    evidence: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "severity": self.severity,
            "location": {"section": self.section, "sentence": self.sentence_index},
            "expected": self.expected,
            "found": self.found,
            "evidence": list(self.evidence),
        }


def _iter_sentences(draft: NarrativeDraft):
    for section in SECTION_ORDER:
        for index, sentence in enumerate(draft.sections.get(section, ())):
            yield section, index, sentence


def derivable_amounts_minor(case: CaseFile, findings: Sequence[AgentFinding] = ()) -> set[int]:
    """The exact-match universe: per-transaction amounts, per-window sums
    from finding metrics, and grand totals per currency and direction."""
    values = {t.amount_minor for t in case.transactions}
    credit: dict[str, int] = {}
    debit: dict[str, int] = {}
    for txn in case.transactions:
        bucket = credit if txn.direction == "credit" else debit
        bucket[txn.currency] = bucket.get(txn.currency, 0) + txn.amount_minor
    values.update(credit.values())
    values.update(debit.values())
    for currency in set(credit) | set(debit):
        values.add(credit.get(currency, 0) + debit.get(currency, 0))
    for finding in findings:
        for key in ("sum_minor", "inflow_minor", "outflow_minor"):
            if key in finding.metrics:
                values.add(int(finding.metrics[key]))
    return values


def verify_facts(draft: NarrativeDraft, case: CaseFile,
                 findings: Sequence[AgentFinding] = (),
                 known_person_tokens: set[str] | None = None) -> list[ValidationFlag]:
    """Cross-check every amount, date, and subject mention in the body."""
    flags: list[ValidationFlag] = []
    amounts_ok = derivable_amounts_minor(case, findings)
    date_lo: date | None = None
    date_hi: date | None = None
    if draft.intro.activity_start and draft.intro.activity_end:
        date_lo = draft.intro.activity_start.date()
        date_hi = draft.intro.activity_end.date()
    if known_person_tokens is None:
        known_person_tokens = set(draft.intro.subject_tokens)

    for section, index, sentence in _iter_sentences(draft):
        for m in _AMOUNT.finditer(sentence):
            whole = int(m.group(1).replace(",", ""))
            cents = int(m.group(2)) if m.group(2) else 0
            minor = whole * 100 + cents
            if minor not in amounts_ok:
                nearest = min(amounts_ok, key=lambda v: (abs(v - minor), v), default=0)
                flags.append(
                    ValidationFlag(
                        kind="amount_mismatch",
                        severity="block",
                        section=section,
                        sentence_index=index,
                        expected=f"${format_major(nearest, 'USD')}" if amounts_ok else "no derivable amounts",
                        found=m.group(0),
                    )
                )
        found_dates: list[tuple[str, date]] = []
        for m in _ISO_DATE.finditer(sentence):
            try:
                found_dates.append((m.group(0), date(int(m.group(1)), int(m.group(2)), int(m.group(3)))))
            except ValueError:
                continue
        for m in _MONTH_DATE.finditer(sentence):
            try:
                found_dates.append((m.group(0), date(int(m.group(3)), _MONTHS[m.group(1)], int(m.group(2)))))
            except ValueError:
                continue
        for rendered, value in found_dates:
            if date_lo is None or date_hi is None or not (date_lo <= value <= date_hi):
                flags.append(
                    ValidationFlag(
                        kind="date_mismatch",
                        severity="block",
                        section=section,
                        sentence_index=index,
                        expected=(
                            f"within activity range {date_lo} .. {date_hi}"
                            if date_lo
                            else "no case activity to date"
                        ),
                        found=rendered,
                    )
                )
        for m in _PERSON_TOKEN.finditer(sentence):
            if m.group(0) not in known_person_tokens:
                flags.append(
                    ValidationFlag(
                        kind="subject_mismatch",
                        severity="block",
                        section=section,
                        sentence_index=index,
                        expected=f"one of {sorted(known_person_tokens)}",
                        found=m.group(0),
                    )
                )
    return flags


def verify_coverage(draft: NarrativeDraft, findings: Sequence[AgentFinding],
                    detected: Sequence[str]) -> list[ValidationFlag]:
    """Critical findings must be cited; typology claims must be detected."""
    flags: list[ValidationFlag] = []
    cited = draft.cited_ids()
    for finding in findings:
        if finding.severity == "critical" and finding.finding_id not in cited:
            flags.append(
                ValidationFlag(
                    kind="uncovered_finding",
                    severity="warn",
                    section=None,
                    sentence_index=None,
                    expected=f"citation of {finding.finding_id}",
                    found="not cited anywhere in the body",
                    evidence=(finding.finding_id,),
                )
            )
    detected_set = set(detected)
    claimed = set(draft.intro.typologies)
    body_text = " ".join(draft.section_text(s) for s in SECTION_ORDER).lower()
    for typology in TYPOLOGIES:
        spoken = typology.replace("_", " ")
        if typology in claimed or spoken in body_text or typology in body_text:
            if typology not in detected_set:
                flags.append(
                    ValidationFlag(
                        kind="unsupported_claim",
                        severity="block",
                        section=None,
                        sentence_index=None,
                        expected=f"typology within detected set {sorted(detected_set)}",
                        found=typology,
                    )
                )
    return flags


def verify_regulatory(draft: NarrativeDraft, checklist: Sequence[ChecklistItem],
                      intel_present: bool) -> list[ValidationFlag]:
    flags: list[ValidationFlag] = []
    has_intel_citation = any(c.startswith("intel:") for c in draft.cited_ids())
    for item in checklist:
        if item.check == "section_present":
            section = item.arg or ""
            if not draft.sections.get(section):
                flags.append(
                    ValidationFlag(
                        kind="missing_section",
                        severity="block",
                        section=section,
                        sentence_index=None,
                        expected=f"non-empty {section} section",
                        found="section absent or empty",
                        evidence=(f"memory:{item.record_id}",),
                    )
                )
        elif item.check == "intel_reference":
            if intel_present and not has_intel_citation:
                flags.append(
                    ValidationFlag(
                        kind="regulatory_gap",
                        severity="warn",
                        section="supporting_information",
                        sentence_index=None,
                        expected="citation of at least one external intelligence item",
                        found="intel findings exist but none are cited",
                        evidence=(f"memory:{item.record_id}",),
                    )
                )
    return flags


def coherence_heuristics(draft: NarrativeDraft) -> list[ValidationFlag]:
    """Mock-mode coherence: canonical section ordering and subject grounding."""
    flags: list[ValidationFlag] = []
    present = [s for s in draft.sections]
    canonical = [s for s in SECTION_ORDER if s in draft.sections]
    if present != canonical:
        flags.append(
            ValidationFlag(
                kind="coherence",
                severity="warn",
                section=None,
                sentence_index=None,
                expected=f"section order {canonical}",
                found=f"section order {present}",
            )
        )
    who_text = draft.section_text("who")
    if draft.intro.subject_tokens and who_text and not any(
        token in who_text for token in draft.intro.subject_tokens
    ):
        flags.append(
            ValidationFlag(
                kind="coherence",
                severity="warn",
                section="who",
                sentence_index=0,
                expected="who section mentions at least one case subject",
                found="no subject token present",
            )
        )
    return flags
