"""Investigator-facing SAR document: the one place mask tokens are resolved."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..errors import ConfigMissing
from ..ingestion.model import CaseFile, format_major
from ..privacy.masker import unmask
from ..privacy.vault import MaskingVault
from .adapter import SECTION_ORDER
from .engine import ChainOfThoughtTrace, NarrativeDraft

REQUIRED_FILER_FIELDS = ("name", "title", "phone", "email")
REQUIRED_INSTITUTION_FIELDS = ("name", "id", "address")


@dataclass(frozen=True)
class SarDocument:
    case_id: str
    draft_version: int
    subjects: tuple[dict[str, Any], ...]
    activity: dict[str, Any]  # date range + typology classification labels
    institution: dict[str, Any]
    filer_contact: dict[str, Any]
    narrative: dict[str, str]  # section -> unmasked prose
    supporting_documentation: tuple[str, ...]
    overall_confidence: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "draft_version": self.draft_version,
            "subjects": [dict(s) for s in self.subjects],
            "activity": dict(self.activity),
            "institution": dict(self.institution),
            "filer_contact": dict(self.filer_contact),
            "narrative": dict(self.narrative),
            "supporting_documentation": list(self.supporting_documentation),
            "overall_confidence": self.overall_confidence,
        }


def _require_block(config: dict, key: str, fields: tuple[str, ...]) -> dict[str, Any]:
    block = config.get(key)
    if not isinstance(block, dict):
        raise ConfigMissing(f"{key} block missing from config")
    missing = [f for f in fields if not block.get(f)]
    if missing:
        raise ConfigMissing(f"{key} config missing fields: {missing}")
    return dict(block)


def render_trace(trace: ChainOfThoughtTrace, vault: MaskingVault) -> dict[str, Any]:
    doc = trace.to_doc()
    for step in doc["steps"]:
        step["description"] = unmask(step["description"], vault)
        step["conclusion"] = unmask(step["conclusion"], vault)
    return doc


def render_sar(draft: NarrativeDraft, case: CaseFile, vault: MaskingVault,
               config: dict) -> SarDocument:
    """Resolve every mask token and attach institution/filer blocks.

    Pure given its inputs; config gaps fail here, at render, never at
    generation time.
    """
    institution = _require_block(config, "institution", REQUIRED_INSTITUTION_FIELDS)
    filer = _require_block(config, "filer", REQUIRED_FILER_FIELDS)

    subjects = []
    for token in draft.intro.subject_tokens:
        name = unmask(token, vault)
        profile = next((s for s in case.subjects if s.name == name), None)
        entry: dict[str, Any] = {"name": name}
        if profile is not None:
            entry.update(
                {
                    "id": profile.id,
                    "dob": profile.dob.isoformat(),
                    "address": profile.address,
                    "national_id": profile.national_id,
                    "accounts": list(profile.account_ids),
                }
            )
        subjects.append(entry)

    activity = {
        "date_range": [
            draft.intro.activity_start.isoformat() if draft.intro.activity_start else None,
            draft.intro.activity_end.isoformat() if draft.intro.activity_end else None,
        ],
        "typologies": list(draft.intro.typologies),
        "total_credits": {
            c: format_major(v, c) for c, v in sorted(draft.intro.credit_totals.items())
        },
        "total_debits": {
            c: format_major(v, c) for c, v in sorted(draft.intro.debit_totals.items())
        },
    }

    narrative = {
        section: unmask(draft.section_text(section), vault) for section in SECTION_ORDER
    }

    cited = draft.cited_ids()
    inventory = [
        f"transaction and account records for {len(case.transactions)} transactions",
        f"{len(case.communications)} communication excerpt(s)",
        f"{sum(1 for c in cited if c.startswith('intel:'))} external intelligence item(s)",
        f"{sum(1 for c in cited if ':' in c and not c.startswith(('intel:', 'indicator:', 'memory:')))} analytic finding(s)",
    ]

    return SarDocument(
        case_id=draft.case_id,
        draft_version=draft.draft_version,
        subjects=tuple(subjects),
        activity=activity,
        institution=institution,
        filer_contact=filer,
        narrative=narrative,
        supporting_documentation=tuple(inventory),
        overall_confidence=draft.trace.overall_confidence,
    )
