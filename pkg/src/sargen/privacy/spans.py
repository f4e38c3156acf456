"""Entity spans and the overlap-resolution rule shared by all recognizers."""

from __future__ import annotations

from dataclasses import dataclass

CATEGORIES = ("PERSON", "SSN", "ACCOUNT", "ADDRESS", "EMAIL", "PHONE", "DOB", "IP", "ORG")


@dataclass(frozen=True)
class EntitySpan:
    start: int  # half-open character offsets
    end: int
    category: str
    confidence: float
    source: str  # recognizer id

    @property
    def length(self) -> int:
        return self.end - self.start


def resolve_overlaps(spans: list[EntitySpan]) -> list[EntitySpan]:
    """Reduce raw matches to non-overlapping spans, sorted by start.

    Longest match wins; ties go to the higher confidence, then to the
    earlier start so the outcome is deterministic.
    """
    ordered = sorted(spans, key=lambda s: (-s.length, -s.confidence, s.start, s.category))
    chosen: list[EntitySpan] = []
    for span in ordered:
        if any(span.start < c.end and c.start < span.end for c in chosen):
            continue
        chosen.append(span)
    chosen.sort(key=lambda s: s.start)
    return chosen
