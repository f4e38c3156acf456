"""Red-flag risk-indicator extraction over structured records and free text.

Rules are declared in a versioned registry (JSON); each rule binds a
stable indicator id to a parameterized implementation below. A firing
rule yields exactly one indicator carrying all triggering evidence.
Magnitude rules normalize their metric to [0,1] with a piecewise-linear
ramp between the rule's ``strength_lo`` and ``strength_hi`` params;
boolean rules report strength 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta
from typing import Any, Callable

from ..errors import RegistryInvalid
from ..ingestion.model import CaseFile, Transaction, to_minor_units

INDICATOR_CATEGORIES = (
    "anomalous_access",
    "atypical_payment",
    "exploitation_pattern",
    "jurisdiction",
    "content",
    "dispute",
)


@dataclass(frozen=True)
class EvidenceRef:
    kind: str  # transaction | event | text | subject | account
    ref: str

    def render(self) -> str:
        return f"{self.kind}:{self.ref}"


@dataclass(frozen=True)
class RiskIndicator:
    id: str
    category: str
    evidence: tuple[EvidenceRef, ...]
    strength: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "category": self.category,
            "evidence": [e.render() for e in self.evidence],
            "strength": self.strength,
        }


def ramp(value: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 1.0
    return max(0.0, min(1.0, (value - lo) / (hi - lo)))


def resolve_evidence(case: CaseFile, ref: EvidenceRef) -> bool:
    """True when the reference points at something present in the case."""
    if ref.kind == "transaction":
        return case.transaction(ref.ref) is not None
    if ref.kind == "subject":
        return case.subject(ref.ref) is not None
    if ref.kind == "account":
        return case.account(ref.ref) is not None
    if ref.kind == "event":
        account_id, _, index = ref.ref.rpartition("#")
        acct = case.account(account_id)
        return acct is not None and index.isdigit() and int(index) < len(acct.events)
    if ref.kind == "text":
        source = ref.ref.split(":", 1)[0]
        if source == "memo":
            txn_id = ref.ref.split(":")[1]
            return case.transaction(txn_id) is not None
        if source == "comm":
            idx = int(ref.ref.split(":")[1])
            return idx < len(case.communications)
        return False
    return False


# --- rule implementations -----------------------------------------------


def _windows(txns: tuple[Transaction, ...], hours: float):
    span = timedelta(hours=hours)
    for i, anchor in enumerate(txns):
        yield [t for t in txns[i:] if t.timestamp - anchor.timestamp <= span]


def _amount_band_burst(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    low = params["band_low_major"]
    high = params["band_high_major"]
    directions = params.get("directions", ["credit", "debit"])
    min_count = params["min_count"]
    band = tuple(
        t for t in case.transactions
        if t.direction in directions
        and to_minor_units(low, t.currency, "band") <= t.amount_minor < to_minor_units(high, t.currency, "band")
    )
    hit_ids: list[str] = []
    for window in _windows(band, params["window_hours"]):
        if len(window) >= min_count:
            hit_ids.extend(t.id for t in window if t.id not in hit_ids)
    if not hit_ids:
        return None
    return [EvidenceRef("transaction", tid) for tid in hit_ids], 1.0


def _pass_through(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    span = timedelta(hours=params["window_hours"])
    best: tuple[float, list[str]] | None = None
    credits = [t for t in case.transactions if t.direction == "credit"]
    for anchor in credits:
        window = [
            t for t in case.transactions
            if anchor.timestamp <= t.timestamp <= anchor.timestamp + span
        ]
        inflow = sum(t.amount_minor for t in window if t.direction == "credit")
        outflow = sum(t.amount_minor for t in window if t.direction == "debit")
        min_inflow = to_minor_units(params["min_inflow_major"], "USD", "min_inflow")
        if inflow < min_inflow or inflow == 0:
            continue
        ratio = outflow / inflow
        if ratio >= params["fire_ratio"] and (best is None or ratio > best[0]):
            best = (ratio, [t.id for t in window])
    if best is None:
        return None
    strength = ramp(best[0], params["strength_lo"], params["strength_hi"])
    return [EvidenceRef("transaction", tid) for tid in best[1]], strength


def _txn_velocity(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    max_count = params["max_count"]
    best: list[Transaction] = []
    for window in _windows(case.transactions, params["window_hours"]):
        if len(window) > len(best):
            best = window
    if len(best) <= max_count:
        return None
    strength = ramp(len(best), params["strength_lo"], params["strength_hi"])
    return [EvidenceRef("transaction", t.id) for t in best], strength


def _country_list(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    countries = set(params["countries"])
    hits = [t for t in case.transactions if t.counterparty_country in countries]
    if not hits:
        return None
    return [EvidenceRef("transaction", t.id) for t in hits], 1.0


def _channel_count(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    hits = [t for t in case.transactions if t.channel == params["channel"]]
    if len(hits) < params["min_count"]:
        return None
    return [EvidenceRef("transaction", t.id) for t in hits], 1.0


def _lexicon_hit(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    terms = [t.lower() for t in params["terms"]]
    evidence: list[EvidenceRef] = []

    def scan(text: str, make_ref: Callable[[int, int], EvidenceRef]) -> None:
        lowered = text.lower()
        for term in terms:
            start = 0
            while True:
                idx = lowered.find(term, start)
                if idx < 0:
                    break
                evidence.append(make_ref(idx, idx + len(term)))
                start = idx + 1

    for txn in case.transactions:
        if txn.memo:
            scan(txn.memo, lambda a, b, tid=txn.id: EvidenceRef("text", f"memo:{tid}:{a}-{b}"))
    for i, comm in enumerate(case.communications):
        scan(comm.text, lambda a, b, idx=i: EvidenceRef("text", f"comm:{idx}:{a}-{b}"))
    if not evidence:
        return None
    return evidence, 1.0


def _elder_subject(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    if case.alert_meta is None:
        return None
    # Masked snapshots truncate DOBs to January 1st, so age is computed by
    # calendar year only; identical before and after masking.
    cutoff_year = case.alert_meta.detection_date.year - params["min_age_years"]
    hits = [s for s in case.subjects if s.dob.year <= cutoff_year]
    if not hits:
        return None
    return [EvidenceRef("subject", s.id) for s in hits], 1.0


def _account_txns(case: CaseFile, account_id: str) -> tuple[Transaction, ...]:
    attributed = tuple(t for t in case.transactions if t.account_id == account_id)
    # Unattributed fixtures fall back to the case-wide stream.
    return attributed or case.transactions


def _dormancy_reactivation(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    gap = timedelta(days=params["dormancy_days"])
    evidence: list[EvidenceRef] = []
    for account in case.accounts:
        txns = _account_txns(case, account.id)
        for prev, curr in zip(txns, txns[1:]):
            if curr.timestamp - prev.timestamp >= gap:
                for tid in (prev.id, curr.id):
                    ref = EvidenceRef("transaction", tid)
                    if ref not in evidence:
                        evidence.append(ref)
    if not evidence:
        return None
    return evidence, 1.0


def _credential_change_burst(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    span = timedelta(hours=params["window_hours"])
    kinds = set(params.get("event_kinds", ["password_change", "device_change"]))
    evidence: list[EvidenceRef] = []
    for account in case.accounts:
        txns = _account_txns(case, account.id)
        for idx, event in enumerate(account.events):
            if event.kind not in kinds:
                continue
            burst = [
                t for t in txns
                if event.timestamp <= t.timestamp <= event.timestamp + span
            ]
            if len(burst) >= params["min_count"]:
                evidence.append(EvidenceRef("event", f"{account.id}#{idx}"))
                for t in burst:
                    ref = EvidenceRef("transaction", t.id)
                    if ref not in evidence:
                        evidence.append(ref)
    if not evidence:
        return None
    return evidence, 1.0


def _dispute_spike(case: CaseFile, params: dict) -> tuple[list[EvidenceRef], float] | None:
    refs = [
        EvidenceRef("event", f"{account.id}#{idx}")
        for account in case.accounts
        for idx, event in enumerate(account.events)
        if event.kind in ("dispute_filed", "chargeback")
    ]
    if not case.transactions or not refs:
        return None
    rate = len(refs) / len(case.transactions)
    if rate <= params["max_ratio"]:
        return None
    return refs, ramp(rate, params["strength_lo"], params["strength_hi"])


_IMPLS: dict[str, Callable[[CaseFile, dict], tuple[list[EvidenceRef], float] | None]] = {
    "amount_band_burst": _amount_band_burst,
    "pass_through": _pass_through,
    "txn_velocity": _txn_velocity,
    "country_list": _country_list,
    "channel_count": _channel_count,
    "lexicon_hit": _lexicon_hit,
    "elder_subject": _elder_subject,
    "dormancy_reactivation": _dormancy_reactivation,
    "credential_change_burst": _credential_change_burst,
    "dispute_spike": _dispute_spike,
}


def validate_registry(registry: dict) -> None:
    if "version" not in registry or "rules" not in registry:
        raise RegistryInvalid("registry requires version and rules")
    seen: set[str] = set()
    for rule in registry["rules"]:
        rule_id = rule.get("id")
        if not rule_id or rule_id in seen:
            raise RegistryInvalid(f"missing or duplicate rule id: {rule_id!r}")
        seen.add(rule_id)
        if rule.get("category") not in INDICATOR_CATEGORIES:
            raise RegistryInvalid(f"rule {rule_id}: unknown category {rule.get('category')!r}")
        if rule.get("impl") not in _IMPLS:
            raise RegistryInvalid(f"rule {rule_id}: unknown impl {rule.get('impl')!r}")
        if not isinstance(rule.get("params"), dict):
            raise RegistryInvalid(f"rule {rule_id}: params block missing")


def extract_indicators(case: CaseFile, registry: dict) -> list[RiskIndicator]:
    """Evaluate every registry rule; output is ordered by rule id."""
    validate_registry(registry)
    indicators: list[RiskIndicator] = []
    for rule in sorted(registry["rules"], key=lambda r: r["id"]):
        try:
            outcome = _IMPLS[rule["impl"]](case, rule["params"])
        except KeyError as exc:
            raise RegistryInvalid(f"rule {rule['id']}: missing param {exc}") from exc
        if outcome is None:
            continue
        evidence, strength = outcome
        indicators.append(
            RiskIndicator(
                id=rule["id"],
                category=rule["category"],
                evidence=tuple(evidence),
                strength=strength,
            )
        )
    return indicators
