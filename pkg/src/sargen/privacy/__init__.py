"""AI-privacy guard: detect, reversibly mask, and unmask sensitive entities."""

from .masker import (
    DEFAULT_MASK_THRESHOLD,
    MaskedText,
    StreamingMasker,
    mask,
    mask_case,
    mask_stream,
    remask,
    scan_for_leaks,
    unmask,
)
from .recognizer import Recognizer, RuleRecognizer, build_recognizer, detect_entities
from .spans import CATEGORIES, EntitySpan, resolve_overlaps
from .vault import MaskingVault, VaultEntry, format_token

__all__ = [
    "CATEGORIES",
    "DEFAULT_MASK_THRESHOLD",
    "EntitySpan",
    "MaskedText",
    "MaskingVault",
    "Recognizer",
    "RuleRecognizer",
    "StreamingMasker",
    "VaultEntry",
    "build_recognizer",
    "detect_entities",
    "format_token",
    "mask",
    "mask_case",
    "mask_stream",
    "remask",
    "resolve_overlaps",
    "scan_for_leaks",
    "unmask",
]
