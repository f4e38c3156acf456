"""Typology scoring: configurable additive-logistic model over indicators.

The interface (indicators in, ranked probabilities out) matches what a
trained ensemble would expose, so one can be substituted without touching
callers. Weights ship in a versioned JSON config with a documented
synthetic calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

from ..errors import UnknownIndicator
from ..ingestion.model import CaseFile
from .indicators import RiskIndicator, extract_indicators

TYPOLOGIES = (
    "elder_exploitation",
    "romance_scam",
    "human_trafficking",
    "money_mule",
    "terrorist_financing",
    "csam",
    "identity_theft",
    "fraud_scheme",
)

DEFAULT_ACTIVATION_THRESHOLD = 0.35


@dataclass(frozen=True)
class TypologyScore:
    typology: str
    probability: float
    rank: int
    contributing_indicators: tuple[str, ...]

    def to_doc(self) -> dict[str, Any]:
        return {
            "typology": self.typology,
            "probability": self.probability,
            "rank": self.rank,
            "contributing_indicators": list(self.contributing_indicators),
        }


@dataclass(frozen=True)
class CrimeTypeReport:
    case_id: str
    indicators: tuple[RiskIndicator, ...]
    scores: tuple[TypologyScore, ...]
    detected: tuple[str, ...]  # typologies at/above the activation threshold
    model_version: str
    registry_version: str

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "indicators": [i.to_doc() for i in self.indicators],
            "scores": [s.to_doc() for s in self.scores],
            "detected": list(self.detected),
            "model_version": self.model_version,
            "registry_version": self.registry_version,
        }


def logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def known_indicator_ids(model: dict) -> set[str]:
    ids = set(model.get("indicator_ids", []))
    for block in model.get("typologies", {}).values():
        ids.update(block.get("weights", {}))
    return ids


def score_typologies(indicators: Iterable[RiskIndicator], model: dict) -> list[TypologyScore]:
    """probability(t) = logistic(bias_t + sum_i w[t][i] * strength(i))."""
    indicators = list(indicators)
    known = known_indicator_ids(model)
    for ind in indicators:
        if ind.id not in known:
            raise UnknownIndicator(f"indicator {ind.id!r} unknown to model {model.get('version')!r}")
    raw: list[tuple[float, int, str, tuple[str, ...]]] = []
    for order, typology in enumerate(TYPOLOGIES):
        block = model["typologies"].get(typology, {})
        weights = block.get("weights", {})
        z = block.get("bias", 0.0)
        contributing = []
        for ind in sorted(indicators, key=lambda i: i.id):
            w = weights.get(ind.id, 0.0)
            z += w * ind.strength
            if w != 0.0:
                contributing.append(ind.id)
        raw.append((logistic(z), order, typology, tuple(contributing)))
    # Descending probability; ties broken by typology enum order.
    raw.sort(key=lambda item: (-item[0], item[1]))
    return [
        TypologyScore(typology=t, probability=p, rank=rank, contributing_indicators=c)
        for rank, (p, _, t, c) in enumerate(raw, start=1)
    ]


def classify(case: CaseFile, registry: dict, model: dict,
             activation_threshold: float = DEFAULT_ACTIVATION_THRESHOLD) -> CrimeTypeReport:
    indicators = extract_indicators(case, registry)
    scores = score_typologies(indicators, model)
    detected = tuple(s.typology for s in scores if s.probability >= activation_threshold)
    return CrimeTypeReport(
        case_id=case.case_id,
        indicators=tuple(indicators),
        scores=tuple(scores),
        detected=detected,
        model_version=model.get("version", "unversioned"),
        registry_version=registry.get("version", "unversioned"),
    )
