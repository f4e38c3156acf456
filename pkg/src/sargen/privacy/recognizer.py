"""Sensitive-entity recognizers.

The bundled recognizer is an ordered rule set: structured-pattern regexes
for SSN / EMAIL / PHONE / IP / ACCOUNT / DOB plus a dictionary seeded
from the case's own KYC fields (names, addresses, national ids, dates of
birth, account numbers). It is deterministic and fast; a neural model can
be dropped in behind the same two-method interface.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from ..errors import RecognizerUnavailable
from .spans import EntitySpan, resolve_overlaps


class Recognizer(Protocol):
    recognizer_id: str

    def detect(self, text: str) -> list[EntitySpan]: ...

    def max_span_length(self) -> int: ...


@dataclass(frozen=True)
class _RegexRule:
    category: str
    pattern: re.Pattern[str]
    confidence: float


_SSN = re.compile(r"\b\d{3}-\d{2}-\d{4}\b")
_EMAIL = re.compile(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b")
# Covers +1 (415) 555-0100, 415-555-0100, 415.555.0100, and bare 555-0100.
_PHONE = re.compile(r"(?<!\d)(?:\+?1[\s.-]?)?(?:\(\d{3}\)[\s.-]?|\d{3}[\s.-])?\d{3}[\s.-]\d{4}(?!\d)")
_IP = re.compile(r"\b(?:\d{1,3}\.){3}\d{1,3}\b")
# Bare 10-16 digit runs and prefixed digit-bearing ids read as account numbers.
_ACCOUNT = re.compile(
    r"\b(?:(?:acct|account|iban)\s*#?\s*(?=[A-Za-z-]*\d)[A-Za-z0-9-]{4,24}|\d{10,16})\b",
    re.IGNORECASE,
)
# Dates only count as DOB with an explicit birth cue nearby; activity dates
# in narratives must never be masked.
_DOB = re.compile(
    r"(?:\bDOB\b|\bdate of birth\b|\bborn(?:\s+on)?\b)[:\s]*"
    r"(\d{4}-\d{2}-\d{2}|\d{1,2}/\d{1,2}/\d{4}|[A-Z][a-z]+ \d{1,2}, \d{4})",
    re.IGNORECASE,
)

_DEFAULT_RULES = (
    _RegexRule("SSN", _SSN, 0.95),
    _RegexRule("EMAIL", _EMAIL, 0.95),
    _RegexRule("IP", _IP, 0.9),
    _RegexRule("ACCOUNT", _ACCOUNT, 0.85),
    _RegexRule("PHONE", _PHONE, 0.8),
)


@dataclass
class RuleRecognizer:
    """Bundled deterministic recognizer: regex rules + case-seeded dictionary."""

    recognizer_id: str = "rules-v1"
    dictionary: dict[str, str] = field(default_factory=dict)  # phrase -> category
    _compiled: re.Pattern[str] | None = field(default=None, repr=False)

    def add_term(self, phrase: str, category: str) -> None:
        phrase = phrase.strip()
        if phrase:
            self.dictionary[phrase] = category
            self._compiled = None

    def seed_from_case(self, case) -> None:
        """Auto-seed every subject name / address / national id into the dictionary."""
        for subject in case.subjects:
            self.add_term(subject.name, "PERSON")
            self.add_term(subject.address, "ADDRESS")
            nid_cat = "SSN" if _SSN.fullmatch(subject.national_id) else "ACCOUNT"
            self.add_term(subject.national_id, nid_cat)
            self.add_term(subject.dob.isoformat(), "DOB")
            try:
                self.add_term(subject.dob.strftime("%B %d, %Y").replace(" 0", " "), "DOB")
            except ValueError:
                pass
        for account in case.accounts:
            self.add_term(account.id, "ACCOUNT")

    def _dictionary_pattern(self) -> re.Pattern[str] | None:
        if not self.dictionary:
            return None
        if self._compiled is None:
            # Longest alternatives first so the regex engine prefers them.
            phrases = sorted(self.dictionary, key=len, reverse=True)
            joined = "|".join(re.escape(p) for p in phrases)
            self._compiled = re.compile(rf"(?<!\w)(?:{joined})(?!\w)")
        return self._compiled

    def detect(self, text: str) -> list[EntitySpan]:
        raw: list[EntitySpan] = []
        for rule in _DEFAULT_RULES:
            for m in rule.pattern.finditer(text):
                raw.append(
                    EntitySpan(m.start(), m.end(), rule.category, rule.confidence, self.recognizer_id)
                )
        for m in _DOB.finditer(text):
            raw.append(
                EntitySpan(m.start(1), m.end(1), "DOB", 0.9, self.recognizer_id)
            )
        dict_pattern = self._dictionary_pattern()
        if dict_pattern is not None:
            for m in dict_pattern.finditer(text):
                category = self.dictionary[m.group(0)]
                # Seeded KYC terms always mask: confidence 1.0.
                raw.append(EntitySpan(m.start(), m.end(), category, 1.0, self.recognizer_id))
        return resolve_overlaps(raw)

    def max_span_length(self) -> int:
        # Upper bound on any match length; streaming masking sizes its
        # overlap window from this.
        longest_term = max((len(p) for p in self.dictionary), default=0)
        return max(64, longest_term + 1)


class UnavailableRecognizer:
    """Placeholder for a configured-but-not-installed backend (e.g. neural NER)."""

    def __init__(self, recognizer_id: str) -> None:
        self.recognizer_id = recognizer_id

    def detect(self, text: str) -> list[EntitySpan]:
        raise RecognizerUnavailable(f"recognizer backend {self.recognizer_id!r} is not loaded")

    def max_span_length(self) -> int:
        raise RecognizerUnavailable(f"recognizer backend {self.recognizer_id!r} is not loaded")


def build_recognizer(name: str, case=None, extra_terms: Iterable[tuple[str, str]] = ()) -> Recognizer:
    if name in ("rules", "rules-v1"):
        rec = RuleRecognizer()
        if case is not None:
            rec.seed_from_case(case)
        for phrase, category in extra_terms:
            rec.add_term(phrase, category)
        return rec
    return UnavailableRecognizer(name)


def detect_entities(text: str, recognizer: Recognizer) -> list[EntitySpan]:
    """Run a recognizer pass; spans come back non-overlapping, sorted by start."""
    return recognizer.detect(text)
