"""Draft-versus-golden scoring: intro accuracy, seven-dimension narrative
similarity, weighted final score.

Lexical similarity is token-set Jaccard after the documented
normalization: casefold, strip punctuation, mask tokens canonicalized to
single words (``[[PERSON_1]]`` -> ``person_1``). An adapter-backed
similarity can be slotted in behind the same [0,1] contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ..errors import WeightInvalid
from ..memory.store import tokenize
from ..narrative.adapter import SECTION_ORDER, GenerationParams, LlmAdapter

INTRO_FIELDS = ("date_range", "amount", "subjects", "accounts")

SimilarityFn = Callable[[str, str], float]


def _check_weights(weights: Mapping[str, float], allowed: tuple[str, ...], label: str) -> None:
    unknown = set(weights) - set(allowed)
    if unknown:
        raise WeightInvalid(f"{label} weights reference unknown fields: {sorted(unknown)}")
    total = sum(weights.values())
    if abs(total - 1.0) > 1e-9:
        raise WeightInvalid(f"{label} weights sum to {total}, expected 1")
    if any(w < 0 for w in weights.values()):
        raise WeightInvalid(f"{label} weights must be non-negative")


@dataclass(frozen=True)
class IntroScore:
    matches: dict[str, int]  # field -> 0/1
    weights: dict[str, float]
    total: float

    def to_doc(self) -> dict[str, Any]:
        return {"matches": dict(self.matches), "weights": dict(self.weights), "total": self.total}


@dataclass(frozen=True)
class NarrativeScore:
    similarities: dict[str, float]
    weights: dict[str, float]
    total: float
    diagnostics: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "similarities": dict(self.similarities),
            "weights": dict(self.weights),
            "total": self.total,
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True)
class FinalScore:
    intro_total: float
    narrative_total: float
    weights: dict[str, float]
    final: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "intro_total": self.intro_total,
            "narrative_total": self.narrative_total,
            "weights": dict(self.weights),
            "final": self.final,
        }


def lexical_similarity(a: str, b: str) -> float:
    ta, tb = tokenize(a), tokenize(b)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


_FLOAT_RE = re.compile(r"[01](?:\.\d+)?")


def adapter_similarity(adapter: LlmAdapter) -> SimilarityFn:
    """Similarity backend over an LLM adapter; same [0,1] contract."""

    def sim(a: str, b: str) -> float:
        prompt = (
            "Rate the semantic similarity of the two passages on a 0 to 1 scale. "
            "Respond with a single decimal number.\n\n"
            f"PASSAGE A:\n{a}\n\nPASSAGE B:\n{b}\n"
        )
        text, _ = adapter.generate(prompt, GenerationParams(max_length=8, temperature=0.0, seed=0))
        match = _FLOAT_RE.search(text)
        value = float(match.group(0)) if match else 0.0
        return max(0.0, min(1.0, value))

    return sim


def score_intro(draft_intro: Mapping[str, Any], golden_intro: Mapping[str, Any],
                weights: Mapping[str, float]) -> IntroScore:
    """Per-field exact matches: dates equal, amounts exact in minor units,
    subject and account sets equal."""
    _check_weights(weights, INTRO_FIELDS, "intro")
    matches: dict[str, int] = {}
    matches["date_range"] = int(
        list(draft_intro.get("date_range") or []) == list(golden_intro.get("date_range") or [])
    )
    matches["amount"] = int(
        dict(draft_intro.get("credit_totals") or {}) == dict(golden_intro.get("credit_totals") or {})
        and dict(draft_intro.get("debit_totals") or {}) == dict(golden_intro.get("debit_totals") or {})
    )
    matches["subjects"] = int(
        set(draft_intro.get("subjects") or []) == set(golden_intro.get("subjects") or [])
    )
    matches["accounts"] = int(
        set(draft_intro.get("accounts") or []) == set(golden_intro.get("accounts") or [])
    )
    total = sum(weights.get(field, 0.0) * matches[field] for field in INTRO_FIELDS)
    return IntroScore(matches=matches, weights=dict(weights), total=total)


def score_narrative(draft_sections: Mapping[str, str], golden_sections: Mapping[str, str],
                    weights: Mapping[str, float],
                    similarity: SimilarityFn = lexical_similarity) -> NarrativeScore:
    _check_weights(weights, SECTION_ORDER, "narrative")
    similarities: dict[str, float] = {}
    diagnostics: list[str] = []
    for dimension in SECTION_ORDER:
        golden_text = golden_sections.get(dimension, "")
        draft_text = draft_sections.get(dimension, "")
        if not draft_text:
            similarities[dimension] = 0.0
            diagnostics.append(f"section {dimension} missing from draft; scored 0")
            continue
        similarities[dimension] = similarity(draft_text, golden_text)
    total = sum(weights.get(d, 0.0) * similarities[d] for d in SECTION_ORDER)
    return NarrativeScore(
        similarities=similarities,
        weights=dict(weights),
        total=total,
        diagnostics=tuple(diagnostics),
    )


def final_score(intro: IntroScore, narrative: NarrativeScore,
                w_intro: float, w_narr: float) -> FinalScore:
    if abs(w_intro + w_narr - 1.0) > 1e-9 or w_intro < 0 or w_narr < 0:
        raise WeightInvalid(f"final weights {w_intro}+{w_narr} must be non-negative and sum to 1")
    return FinalScore(
        intro_total=intro.total,
        narrative_total=narrative.total,
        weights={"intro": w_intro, "narrative": w_narr},
        final=w_intro * intro.total + w_narr * narrative.total,
    )
