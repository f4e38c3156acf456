"""Automated pre-production evaluation against golden datasets."""

from .runner import GoldenCase, format_report, resolved_intro, run_eval, score_case
from .scoring import (
    INTRO_FIELDS,
    FinalScore,
    IntroScore,
    NarrativeScore,
    adapter_similarity,
    final_score,
    lexical_similarity,
    score_intro,
    score_narrative,
)

__all__ = [
    "INTRO_FIELDS",
    "FinalScore",
    "GoldenCase",
    "IntroScore",
    "NarrativeScore",
    "adapter_similarity",
    "final_score",
    "format_report",
    "lexical_similarity",
    "resolved_intro",
    "run_eval",
    "score_case",
    "score_intro",
    "score_narrative",
]
