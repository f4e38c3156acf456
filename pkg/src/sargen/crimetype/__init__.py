"""Crime typology detection: risk indicators plus ranked probabilistic scoring."""

from .indicators import (
    INDICATOR_CATEGORIES,
    EvidenceRef,
    RiskIndicator,
    extract_indicators,
    resolve_evidence,
    validate_registry,
)
from .model import (
    DEFAULT_ACTIVATION_THRESHOLD,
    TYPOLOGIES,
    CrimeTypeReport,
    TypologyScore,
    classify,
    logistic,
    score_typologies,
)

__all__ = [
    "DEFAULT_ACTIVATION_THRESHOLD",
    "INDICATOR_CATEGORIES",
    "TYPOLOGIES",
    "CrimeTypeReport",
    "EvidenceRef",
    "RiskIndicator",
    "TypologyScore",
    "classify",
    "extract_indicators",
    "logistic",
    "resolve_evidence",
    "score_typologies",
    "validate_registry",
]
