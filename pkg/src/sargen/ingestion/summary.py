"""Structured case summary: the aggregation layer downstream stages consume."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any

from .model import CaseFile, format_major


@dataclass(frozen=True)
class StructuredSummary:
    case_id: str
    subject_roster: tuple[str, ...]  # subject ids, case order
    account_ids: tuple[str, ...]
    transaction_count: int
    credit_totals: dict[str, int]  # currency -> minor units
    debit_totals: dict[str, int]
    country_counts: dict[str, int]
    date_range: tuple[datetime, datetime] | None  # None means "no activity"

    @property
    def no_activity(self) -> bool:
        return self.date_range is None

    def total_major(self, direction: str, currency: str) -> str:
        totals = self.credit_totals if direction == "credit" else self.debit_totals
        return format_major(totals.get(currency, 0), currency)

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "subject_roster": list(self.subject_roster),
            "account_ids": list(self.account_ids),
            "transaction_count": self.transaction_count,
            "credit_totals": {
                c: format_major(v, c) for c, v in sorted(self.credit_totals.items())
            },
            "debit_totals": {
                c: format_major(v, c) for c, v in sorted(self.debit_totals.items())
            },
            "country_counts": dict(sorted(self.country_counts.items())),
            "date_range": (
                None
                if self.date_range is None
                else [self.date_range[0].isoformat(), self.date_range[1].isoformat()]
            ),
            "no_activity": self.no_activity,
        }


def summarize_case(case: CaseFile) -> StructuredSummary:
    """Aggregate totals, date range, and per-country counts by direct summation."""
    credit: dict[str, int] = {}
    debit: dict[str, int] = {}
    countries: dict[str, int] = {}
    for txn in case.transactions:
        bucket = credit if txn.direction == "credit" else debit
        bucket[txn.currency] = bucket.get(txn.currency, 0) + txn.amount_minor
        countries[txn.counterparty_country] = countries.get(txn.counterparty_country, 0) + 1
    date_range = None
    if case.transactions:
        date_range = (case.transactions[0].timestamp, case.transactions[-1].timestamp)
    account_ids = tuple(a.id for a in case.accounts)
    return StructuredSummary(
        case_id=case.case_id,
        subject_roster=tuple(s.id for s in case.subjects),
        account_ids=account_ids,
        transaction_count=len(case.transactions),
        credit_totals=credit,
        debit_totals=debit,
        country_counts=countries,
        date_range=date_range,
    )
