"""Case domain model: immutable, validated at construction.

Amounts are stored as integer minor units (cents for 2-exponent
currencies) so compliance aggregation never drifts. Timestamps are
normalized to UTC at ingestion; the original offset is kept in the
record's extensions map under ``tz_offset_minutes``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import Any, Mapping

from ..errors import SchemaViolation

DIRECTIONS = ("credit", "debit")
CHANNELS = ("wire", "ach", "card", "crypto", "p2p", "cash")
ACCOUNT_STATUSES = ("active", "dormant", "closed", "restricted")
EVENT_KINDS = (
    "login",
    "password_change",
    "device_change",
    "limit_change",
    "dispute_filed",
    "chargeback",
)
KYC_RATINGS = ("low", "medium", "high")

# ISO-4217 minor-unit exponents for currencies the pipeline handles; the
# default of 2 covers the long tail.
CURRENCY_EXPONENTS = {"JPY": 0, "KRW": 0, "VND": 0, "KWD": 3, "BHD": 3, "TND": 3}


def currency_exponent(currency: str) -> int:
    return CURRENCY_EXPONENTS.get(currency, 2)


def to_minor_units(amount: str | int | float, currency: str, path: str) -> int:
    """Parse a major-unit decimal into non-negative integer minor units."""
    try:
        dec = Decimal(str(amount))
    except InvalidOperation:
        raise SchemaViolation(path, f"not a decimal amount: {amount!r}")
    if dec < 0:
        raise SchemaViolation(path, f"amount must be >= 0, got {amount}")
    scaled = dec.scaleb(currency_exponent(currency))
    if scaled != scaled.to_integral_value():
        raise SchemaViolation(path, f"amount {amount} exceeds {currency} precision")
    return int(scaled)


def format_major(minor: int, currency: str) -> str:
    """Render minor units back to the canonical major-unit decimal string."""
    exp = currency_exponent(currency)
    if exp == 0:
        return str(minor)
    q = Decimal(minor).scaleb(-exp)
    return f"{q:.{exp}f}"


def parse_utc(value: str, path: str) -> tuple[datetime, int]:
    """Parse an ISO-8601 instant; returns (UTC datetime, original offset minutes)."""
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected ISO-8601 string, got {type(value).__name__}")
    text = value.replace("Z", "+00:00")
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise SchemaViolation(path, f"unparseable timestamp: {value!r}")
    if parsed.tzinfo is None:
        raise SchemaViolation(path, f"timestamp missing timezone offset: {value!r}")
    offset = parsed.utcoffset()
    offset_minutes = int(offset.total_seconds() // 60) if offset else 0
    return parsed.astimezone(timezone.utc), offset_minutes


def parse_date(value: str, path: str) -> date:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected ISO date string, got {type(value).__name__}")
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise SchemaViolation(path, f"unparseable date: {value!r}")


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float


@dataclass(frozen=True)
class Transaction:
    id: str
    timestamp: datetime  # UTC
    amount_minor: int
    currency: str
    direction: str
    counterparty_id: str
    counterparty_country: str
    channel: str
    memo: str = ""
    geo: GeoPoint | None = None
    account_id: str | None = None
    extensions: Mapping[str, Any] = field(default_factory=dict)

    @property
    def amount_major(self) -> str:
        return format_major(self.amount_minor, self.currency)


@dataclass(frozen=True)
class AccountEvent:
    kind: str
    timestamp: datetime
    metadata: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AccountRecord:
    id: str
    opened_at: date
    status: str
    events: tuple[AccountEvent, ...] = ()
    extensions: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SubjectProfile:
    id: str
    name: str
    dob: date
    address: str
    national_id: str
    account_ids: tuple[str, ...]
    kyc_risk_rating: str
    extensions: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Communication:
    timestamp: datetime
    participants: tuple[str, ...]
    text: str


@dataclass(frozen=True)
class RiskSignal:
    tag: str
    text: str


@dataclass(frozen=True)
class AlertMeta:
    alert_id: str
    detection_date: date
    source_system: str


@dataclass(frozen=True)
class CaseFile:
    case_id: str
    subjects: tuple[SubjectProfile, ...]
    accounts: tuple[AccountRecord, ...]
    transactions: tuple[Transaction, ...]
    communications: tuple[Communication, ...] = ()
    risk_signals: tuple[RiskSignal, ...] = ()
    alert_meta: AlertMeta | None = None
    extensions: Mapping[str, Any] = field(default_factory=dict)

    def account(self, account_id: str) -> AccountRecord | None:
        for acct in self.accounts:
            if acct.id == account_id:
                return acct
        return None

    def transaction(self, txn_id: str) -> Transaction | None:
        for txn in self.transactions:
            if txn.id == txn_id:
                return txn
        return None

    def subject(self, subject_id: str) -> SubjectProfile | None:
        for subj in self.subjects:
            if subj.id == subject_id:
                return subj
        return None
