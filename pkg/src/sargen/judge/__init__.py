"""Compliance validation agent (agent-as-a-judge)."""

from .checks import (
    FLAG_KINDS,
    ValidationFlag,
    coherence_heuristics,
    derivable_amounts_minor,
    verify_coverage,
    verify_facts,
    verify_regulatory,
)
from .judge import VERDICTS, JudgeReport, fetch_checklist, judge, verdict_for

__all__ = [
    "FLAG_KINDS",
    "VERDICTS",
    "JudgeReport",
    "ValidationFlag",
    "coherence_heuristics",
    "derivable_amounts_minor",
    "fetch_checklist",
    "judge",
    "verdict_for",
    "verify_coverage",
    "verify_facts",
    "verify_regulatory",
]
