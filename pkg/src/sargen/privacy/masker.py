"""Reversible masking: token substitution, exact round trip, streaming mode.

Token syntax is ``[[CATEGORY_n]]`` with per-case counters. Literal ``[[``
in source text is escaped to ``[[[[`` before substitution, which makes
the token grammar unambiguous and the round trip exact on arbitrary
Unicode input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from dataclasses import replace as dc_replace
from datetime import date

from ..ingestion.model import CaseFile
from .recognizer import Recognizer
from .spans import EntitySpan
from .vault import MaskingVault

TOKEN_RE = re.compile(r"\[\[([A-Z]+)_(\d+)\]\]")
_RESIDUAL_DIGITS = re.compile(r"\d{9,}")

DEFAULT_MASK_THRESHOLD = 0.5


@dataclass(frozen=True)
class MaskedText:
    text: str
    vault_ref: str  # case id of the owning vault
    leak_audit: tuple[str, ...] = ()


def _escape(segment: str) -> str:
    return segment.replace("[[", "[[[[")


def _build_masked(text: str, spans: list[EntitySpan], vault: MaskingVault,
                  pre_resolved: dict[tuple[int, int], str] | None = None) -> str:
    out: list[str] = []
    cursor = 0
    for span in spans:
        out.append(_escape(text[cursor:span.start]))
        token = None
        if pre_resolved is not None:
            token = pre_resolved.get((span.start, span.end))
        if token is None:
            token = vault.token_for(text[span.start:span.end], span.category)
        out.append(token)
        cursor = span.end
    out.append(_escape(text[cursor:]))
    return "".join(out)


def _audit(masked: str, vault: MaskingVault) -> tuple[str, ...]:
    warnings = [f"vault original for {t} present in masked output" for t in scan_for_leaks(masked, vault)]
    warnings.extend(
        f"residual long digit run at offset {m.start()}" for m in _RESIDUAL_DIGITS.finditer(masked)
    )
    return tuple(warnings)


def mask(text: str, vault: MaskingVault, recognizer: Recognizer,
         threshold: float = DEFAULT_MASK_THRESHOLD) -> MaskedText:
    """Replace every detected span at or above the threshold with its token."""
    spans = [s for s in recognizer.detect(text) if s.confidence >= threshold]
    masked = _build_masked(text, spans, vault)
    return MaskedText(text=masked, vault_ref=vault.case_id, leak_audit=_audit(masked, vault))


def unmask(masked: MaskedText | str, vault: MaskingVault) -> str:
    """Exact inverse of mask: tokens restored, escapes reversed."""
    text = masked.text if isinstance(masked, MaskedText) else masked
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        j = text.find("[[", i)
        if j < 0:
            out.append(text[i:])
            break
        out.append(text[i:j])
        if text.startswith("[[[[", j):
            out.append("[[")
            i = j + 4
            continue
        m = TOKEN_RE.match(text, j)
        if m is not None:
            out.append(vault.lookup(m.group(0)).original)
            i = m.end()
            continue
        # A bare "[[" cannot be produced by mask(); pass it through.
        out.append("[")
        i = j + 1
    return "".join(out)


def remask(text: str, vault: MaskingVault, recognizer: Recognizer,
           threshold: float = DEFAULT_MASK_THRESHOLD) -> MaskedText:
    """Re-protect investigator-supplied text against an existing vault.

    Vault originals appearing verbatim keep their existing tokens (the
    bijection invariant); anything newly detected gets a fresh token.
    """
    claimed: list[tuple[int, int]] = []
    pre_spans: list[EntitySpan] = []
    pre_resolved: dict[tuple[int, int], str] = {}
    for entry in vault.originals():
        if not entry.original:
            continue
        start = 0
        while True:
            idx = text.find(entry.original, start)
            if idx < 0:
                break
            end = idx + len(entry.original)
            if not any(idx < ce and cs < end for cs, ce in claimed):
                claimed.append((idx, end))
                pre_spans.append(EntitySpan(idx, end, entry.category, 1.0, "vault"))
                pre_resolved[(idx, end)] = entry.token
            start = idx + 1
    detected = [
        s for s in recognizer.detect(text)
        if s.confidence >= threshold
        and not any(s.start < ce and cs < s.end for cs, ce in claimed)
    ]
    spans = sorted(pre_spans + detected, key=lambda s: s.start)
    masked = _build_masked(text, spans, vault, pre_resolved)
    return MaskedText(text=masked, vault_ref=vault.case_id, leak_audit=_audit(masked, vault))


def scan_for_leaks(payload: str, vault: MaskingVault, min_length: int = 4) -> list[str]:
    """Tokens whose originals appear verbatim in a trust-boundary payload."""
    leaked = [
        entry.token
        for entry in vault.originals()
        if len(entry.original) >= min_length and entry.original in payload
    ]
    return sorted(leaked)


class StreamingMasker:
    """Chunked masking with an overlap window, equivalent to whole-document masking.

    The emitter never releases the trailing ``overlap`` characters until
    more input arrives, and only cuts immediately after whitespace outside
    any detected span, so every regex/dictionary decision is made with the
    same context it would have had over the whole document.
    """

    def __init__(self, vault: MaskingVault, recognizer: Recognizer,
                 threshold: float = DEFAULT_MASK_THRESHOLD, overlap: int = 256) -> None:
        self.vault = vault
        self.recognizer = recognizer
        self.threshold = threshold
        self.overlap = max(overlap, recognizer.max_span_length() + 1)
        self._pending = ""

    def feed(self, chunk: str) -> str:
        self._pending += chunk
        if len(self._pending) <= self.overlap:
            return ""
        cut = len(self._pending) - self.overlap
        spans = [s for s in self.recognizer.detect(self._pending) if s.confidence >= self.threshold]
        cut = self._safe_cut(cut, spans)
        if cut <= 0:
            return ""
        emit_spans = [s for s in spans if s.end <= cut]
        out = _build_masked(self._pending[:cut], emit_spans, self.vault)
        self._pending = self._pending[cut:]
        return out

    def flush(self) -> str:
        if not self._pending:
            return ""
        spans = [s for s in self.recognizer.detect(self._pending) if s.confidence >= self.threshold]
        out = _build_masked(self._pending, spans, self.vault)
        self._pending = ""
        return out

    def _safe_cut(self, cut: int, spans: list[EntitySpan]) -> int:
        while cut > 0:
            crossing = next((s for s in spans if s.start < cut < s.end), None)
            if crossing is not None:
                cut = crossing.start
                continue
            if self._pending[cut - 1].isspace():
                return cut
            cut -= 1
        return 0


def mask_stream(chunks, vault: MaskingVault, recognizer: Recognizer,
                threshold: float = DEFAULT_MASK_THRESHOLD, overlap: int = 256) -> MaskedText:
    """Mask an iterable of text chunks; output equals whole-document masking."""
    masker = StreamingMasker(vault, recognizer, threshold, overlap)
    parts = [masker.feed(chunk) for chunk in chunks]
    parts.append(masker.flush())
    masked = "".join(parts)
    return MaskedText(text=masked, vault_ref=vault.case_id, leak_audit=_audit(masked, vault))


def mask_case(case: CaseFile, vault: MaskingVault, recognizer: Recognizer,
              threshold: float = DEFAULT_MASK_THRESHOLD) -> CaseFile:
    """Produce the privacy-masked snapshot consumed by typology agents.

    All text surfaces (names, addresses, ids, memos, communications, risk
    signals) are tokenized; account ids are tokenized consistently so
    cross-references still resolve. Dates of birth are truncated to
    January 1st of the birth year: the age signal survives for rule
    evaluation while the exact date never leaves the vault.
    """

    def mask_text(value: str) -> str:
        return mask(value, vault, recognizer, threshold).text

    subjects = tuple(
        dc_replace(
            subj,
            name=vault.token_for(subj.name, "PERSON"),
            address=vault.token_for(subj.address, "ADDRESS"),
            national_id=vault.token_for(subj.national_id, "SSN"),
            dob=date(subj.dob.year, 1, 1),
            account_ids=tuple(vault.token_for(a, "ACCOUNT") for a in subj.account_ids),
        )
        for subj in case.subjects
    )
    accounts = tuple(
        dc_replace(
            acct,
            id=vault.token_for(acct.id, "ACCOUNT"),
            events=tuple(
                dc_replace(
                    ev,
                    metadata={
                        k: mask_text(v) if isinstance(v, str) else v
                        for k, v in ev.metadata.items()
                    },
                )
                for ev in acct.events
            ),
        )
        for acct in case.accounts
    )
    transactions = tuple(
        dc_replace(
            txn,
            memo=mask_text(txn.memo),
            account_id=None if txn.account_id is None else vault.token_for(txn.account_id, "ACCOUNT"),
        )
        for txn in case.transactions
    )
    communications = tuple(
        dc_replace(
            comm,
            participants=tuple(mask_text(p) for p in comm.participants),
            text=mask_text(comm.text),
        )
        for comm in case.communications
    )
    risk_signals = tuple(dc_replace(sig, text=mask_text(sig.text)) for sig in case.risk_signals)
    return dc_replace(
        case,
        subjects=subjects,
        accounts=accounts,
        transactions=transactions,
        communications=communications,
        risk_signals=risk_signals,
    )
