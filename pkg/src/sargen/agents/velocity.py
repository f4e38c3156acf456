"""Exact sliding-window velocity scan over time-sorted transactions.

A window is anchored at a transaction and spans the configured duration
(closed on both ends). It violates when its count or sum is strictly
greater than the respective limit. Reported windows are maximal: a
violating window whose transaction set is contained in another violating
window's set is suppressed. Because amounts are non-negative, violation
is monotone under set inclusion, so the maximal windows are exactly the
earliest violating anchor for each distinct window endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Sequence

from ..ingestion.model import Transaction


@dataclass(frozen=True)
class VelocityWindow:
    window_start: datetime
    count: int
    sum_minor: int
    transaction_ids: tuple[str, ...]


def velocity_scan(
    transactions: Sequence[Transaction],
    window: timedelta,
    max_count: int | None = None,
    max_sum_minor: int | None = None,
) -> list[VelocityWindow]:
    """Return every maximal violating window; exact, no sampling."""
    txns = list(transactions)
    results: list[VelocityWindow] = []
    last_end = -1
    j = 0
    for i, anchor in enumerate(txns):
        if j < i:
            j = i
        while j + 1 < len(txns) and txns[j + 1].timestamp - anchor.timestamp <= window:
            j += 1
        count = j - i + 1
        total = sum(t.amount_minor for t in txns[i:j + 1])
        violates = (max_count is not None and count > max_count) or (
            max_sum_minor is not None and total > max_sum_minor
        )
        if violates and j > last_end:
            results.append(
                VelocityWindow(
                    window_start=anchor.timestamp,
                    count=count,
                    sum_minor=total,
                    transaction_ids=tuple(t.id for t in txns[i:j + 1]),
                )
            )
            last_end = j
    return results
