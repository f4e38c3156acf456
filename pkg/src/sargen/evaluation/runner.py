"""Batch evaluation over a golden dataset directory.

Layout: one subdirectory per case holding ``case.json`` (pipeline input)
and ``golden.json`` (reference intro fields and the seven reference
sections). Per-case failures are recorded and the batch continues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import SargenError, ValidationFailure
from ..ingestion.model import CaseFile
from ..ingestion.parser import parse_alert
from ..narrative.adapter import SECTION_ORDER
from ..narrative.engine import NarrativeDraft
from ..pipeline.runner import PipelineRun, run_pipeline
from ..privacy.masker import unmask
from .scoring import final_score, lexical_similarity, score_intro, score_narrative


@dataclass(frozen=True)
class GoldenCase:
    case: CaseFile
    raw_case: bytes
    golden_intro: dict[str, Any]
    golden_sections: dict[str, str]

    @classmethod
    def load(cls, directory: Path) -> "GoldenCase":
        raw_case = (directory / "case.json").read_bytes()
        case = parse_alert(raw_case, "json")
        golden = json.loads((directory / "golden.json").read_text(encoding="utf-8"))
        intro = golden.get("golden_intro")
        sections = golden.get("golden_sections")
        if not isinstance(intro, dict) or not isinstance(sections, dict):
            raise ValidationFailure(f"{directory}: golden.json requires golden_intro and golden_sections")
        missing = [s for s in SECTION_ORDER if not sections.get(s)]
        if missing:
            raise ValidationFailure(f"{directory}: golden_sections missing {missing}")
        case_subjects = {s.id for s in case.subjects}
        if not set(intro.get("subjects", [])) <= case_subjects:
            raise ValidationFailure(f"{directory}: golden subjects not present in case")
        case_accounts = {a.id for a in case.accounts}
        if not set(intro.get("accounts", [])) <= case_accounts:
            raise ValidationFailure(f"{directory}: golden accounts not present in case")
        return cls(case=case, raw_case=raw_case, golden_intro=intro, golden_sections=sections)


def resolved_intro(run: PipelineRun, draft: NarrativeDraft) -> dict[str, Any]:
    """Map the masked draft intro back to comparable identifiers."""
    subjects = []
    for token in draft.intro.subject_tokens:
        name = unmask(token, run.vault)
        profile = next((s for s in run.case.subjects if s.name == name), None)
        subjects.append(profile.id if profile else name)
    accounts = [unmask(token, run.vault) for token in draft.intro.account_tokens]
    return {
        "date_range": [
            draft.intro.activity_start.isoformat() if draft.intro.activity_start else None,
            draft.intro.activity_end.isoformat() if draft.intro.activity_end else None,
        ],
        "credit_totals": dict(sorted(draft.intro.credit_totals.items())),
        "debit_totals": dict(sorted(draft.intro.debit_totals.items())),
        "subjects": subjects,
        "accounts": accounts,
    }


def score_case(run: PipelineRun, golden: GoldenCase, weights: dict[str, Any],
               similarity=lexical_similarity) -> dict[str, Any]:
    draft = run.draft()
    intro = score_intro(resolved_intro(run, draft), golden.golden_intro, weights["intro_weights"])
    draft_sections = {
        s: unmask(draft.section_text(s), run.vault) for s in SECTION_ORDER
    }
    narrative = score_narrative(
        draft_sections, golden.golden_sections, weights["narrative_weights"], similarity
    )
    final = final_score(
        intro, narrative,
        weights["final_weights"]["intro"], weights["final_weights"]["narrative"],
    )
    return {
        "intro": intro.to_doc(),
        "narrative": narrative.to_doc(),
        "final": final.to_doc(),
    }


def run_eval(dataset_dir: str | Path, config: dict[str, Any],
             weights: dict[str, Any] | None = None,
             similarity=lexical_similarity) -> dict[str, Any]:
    """Run the full pipeline per golden case and score every draft."""
    dataset = Path(dataset_dir)
    weights = weights or config.get("eval", {})
    per_case: list[dict[str, Any]] = []
    diagnostics: list[str] = []
    case_dirs = sorted(d for d in dataset.iterdir() if d.is_dir()) if dataset.is_dir() else []
    if not case_dirs:
        diagnostics.append(f"no golden cases found under {dataset}")
    for case_dir in case_dirs:
        entry: dict[str, Any] = {"case_dir": case_dir.name}
        try:
            golden = GoldenCase.load(case_dir)
            entry["case_id"] = golden.case.case_id
            run = run_pipeline(golden.raw_case, config)
            entry.update(score_case(run, golden, weights, similarity))
        except (SargenError, OSError, json.JSONDecodeError) as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            diagnostics.append(f"{case_dir.name}: {entry['error']}")
        per_case.append(entry)
    finals = [e["final"]["final"] for e in per_case if "final" in e]
    aggregate = {
        "count_scored": len(finals),
        "count_failed": len(per_case) - len(finals),
        "mean": sum(finals) / len(finals) if finals else None,
        "min": min(finals) if finals else None,
        "max": max(finals) if finals else None,
    }
    return {"per_case": per_case, "aggregate": aggregate, "diagnostics": diagnostics}


def format_report(report: dict[str, Any]) -> str:
    """Human-readable table alongside the JSON artifact."""
    lines = [f"{'case':<14} {'intro':>7} {'narrative':>10} {'final':>7}  note"]
    for entry in report["per_case"]:
        if "error" in entry:
            lines.append(f"{entry['case_dir']:<14} {'-':>7} {'-':>10} {'-':>7}  {entry['error']}")
        else:
            lines.append(
                f"{entry.get('case_id', entry['case_dir']):<14} "
                f"{entry['intro']['total']:>7.3f} {entry['narrative']['total']:>10.3f} "
                f"{entry['final']['final']:>7.3f}"
            )
    agg = report["aggregate"]
    if agg["count_scored"]:
        lines.append(
            f"{'aggregate':<14} mean={agg['mean']:.3f} min={agg['min']:.3f} "
            f"max={agg['max']:.3f} scored={agg['count_scored']} failed={agg['count_failed']}"
        )
    else:
        lines.append("aggregate: nothing scored")
    return "\n".join(lines)
