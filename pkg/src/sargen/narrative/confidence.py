"""Structured confidence scoring for chain-of-thought steps.

Three components, each in [0,1], combined by geometric mean:
  evidentiary_strength   e = min(1, cited_evidence_count / 3)
  contextual_relevance   c = max relevance among cited intel/memory (0 if none)
  regulatory_adherence   r = fraction of applicable checklist items satisfied
                             (1.0 when none apply)
The geometric mean is 0 whenever any component is 0 and 1 only when all
three are 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import DanglingEvidence


@dataclass(frozen=True)
class ConfidenceScore:
    evidentiary_strength: float
    contextual_relevance: float
    regulatory_adherence: float
    combined: float

    def to_doc(self) -> dict:
        return {
            "evidentiary_strength": self.evidentiary_strength,
            "contextual_relevance": self.contextual_relevance,
            "regulatory_adherence": self.regulatory_adherence,
            "combined": self.combined,
        }


@dataclass(frozen=True)
class ChecklistItem:
    record_id: str
    check: str  # "section_present" | "intel_reference"
    arg: str | None = None


def parse_checklist(records) -> tuple[ChecklistItem, ...]:
    """Checklist records use the convention ``CHECK <name> [arg] -- <prose>``."""
    items = []
    for record in records:
        content = record.content.strip()
        if not content.startswith("CHECK "):
            continue
        head = content[len("CHECK "):].split("--", 1)[0].strip()
        parts = head.split()
        if not parts:
            continue
        items.append(
            ChecklistItem(
                record_id=record.id,
                check=parts[0],
                arg=parts[1] if len(parts) > 1 else None,
            )
        )
    return tuple(items)


def combine(e: float, c: float, r: float) -> float:
    return (e * c * r) ** (1.0 / 3.0)


def assign_confidence(
    evidence_ids: Sequence[str],
    known_evidence: set[str],
    relevance: Mapping[str, float],
    checklist: Sequence[ChecklistItem],
    section: str | None,
    section_has_intel_citation: bool,
    section_nonempty: bool,
) -> ConfidenceScore:
    """Score one reasoning step; raises DanglingEvidence on unresolved ids."""
    for evidence_id in evidence_ids:
        if evidence_id not in known_evidence:
            raise DanglingEvidence(evidence_id)
    e = min(1.0, len(evidence_ids) / 3.0)
    c = max((relevance.get(eid, 0.0) for eid in evidence_ids), default=0.0)
    applicable = []
    if section is not None:
        for item in checklist:
            if item.check == "section_present" and item.arg == section:
                applicable.append(section_nonempty)
            elif item.check == "intel_reference" and section == "supporting_information":
                applicable.append(section_has_intel_citation)
    r = (sum(applicable) / len(applicable)) if applicable else 1.0
    return ConfidenceScore(
        evidentiary_strength=e,
        contextual_relevance=c,
        regulatory_adherence=r,
        combined=combine(e, c, r),
    )
