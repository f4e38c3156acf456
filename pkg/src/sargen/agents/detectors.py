"""The seven specialized typology detection agents.

Every agent is a pure function over an immutable, privacy-masked case
snapshot plus its config block, and returns deterministic findings. An
empty list is a valid result. All thresholds are strict-inequality
violations; severity follows the shared 2x-threshold triage rule.
"""

from __future__ import annotations

from datetime import timedelta
from typing import Callable

from ..crimetype.indicators import EvidenceRef
from ..errors import ConfigMissing, UnknownAgent
from ..ingestion.model import CaseFile, Transaction, to_minor_units
from .findings import AGENT_IDS, AgentFinding, severity_for
from .geo import geo_anomaly_scan
from .velocity import velocity_scan


def _txn_refs(ids) -> tuple[EvidenceRef, ...]:
    return tuple(EvidenceRef("transaction", tid) for tid in ids)


def _filter_directions(case: CaseFile, directions) -> list[Transaction]:
    wanted = set(directions)
    return [t for t in case.transactions if t.direction in wanted]


def _agent_txn_fraud(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    findings: list[AgentFinding] = []
    band_low = cfg.get("band_low_major", 9000)
    band_high = cfg.get("band_high_major", 10000)
    min_count = cfg.get("structuring_min_count", 3)
    window = timedelta(hours=cfg.get("structuring_window_hours", 72))
    band = [
        t for t in case.transactions
        if to_minor_units(band_low, t.currency, "band") <= t.amount_minor
        < to_minor_units(band_high, t.currency, "band")
    ]
    hits: list[str] = []
    for i, anchor in enumerate(band):
        group = [t for t in band[i:] if t.timestamp - anchor.timestamp <= window]
        if len(group) >= min_count:
            hits.extend(t.id for t in group if t.id not in hits)
    if hits:
        findings.append(
            AgentFinding(
                agent_id="txn_fraud",
                finding_id=f"txn_fraud:{len(findings) + 1}",
                severity=severity_for(len(hits), min_count),
                confidence=0.9,
                evidence=_txn_refs(hits),
                summary=(
                    f"{len(hits)} transactions kept just below the {band_high} reporting "
                    f"threshold within {int(window.total_seconds() // 3600)}h windows"
                ),
                metrics={"count": float(len(hits)), "band_low": float(band_low), "band_high": float(band_high)},
            )
        )
    ratio_window = timedelta(hours=cfg.get("pass_through_window_hours", 72))
    fire_ratio = cfg.get("pass_through_ratio", 0.8)
    min_inflow = to_minor_units(cfg.get("pass_through_min_inflow_major", 5000), "USD", "inflow")
    best: tuple[float, list[str], int, int] | None = None
    for anchor in (t for t in case.transactions if t.direction == "credit"):
        window_txns = [
            t for t in case.transactions
            if anchor.timestamp <= t.timestamp <= anchor.timestamp + ratio_window
        ]
        inflow = sum(t.amount_minor for t in window_txns if t.direction == "credit")
        outflow = sum(t.amount_minor for t in window_txns if t.direction == "debit")
        if inflow < min_inflow or inflow == 0:
            continue
        ratio = outflow / inflow
        if ratio >= fire_ratio and (best is None or ratio > best[0]):
            best = (ratio, [t.id for t in window_txns], inflow, outflow)
    if best is not None:
        ratio, ids, inflow, outflow = best
        findings.append(
            AgentFinding(
                agent_id="txn_fraud",
                finding_id=f"txn_fraud:{len(findings) + 1}",
                severity=severity_for(ratio, fire_ratio),
                confidence=0.85,
                evidence=_txn_refs(ids),
                summary=(
                    f"pass-through pattern: {ratio:.0%} of inbound funds moved out within "
                    f"{int(ratio_window.total_seconds() // 3600)}h"
                ),
                metrics={
                    "ratio": ratio,
                    "inflow_minor": float(inflow),
                    "outflow_minor": float(outflow),
                },
            )
        )
    return findings


def _agent_velocity(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    window = timedelta(hours=cfg.get("window_hours", 1))
    max_count = cfg.get("max_count", 10)
    max_sum_minor = to_minor_units(cfg.get("max_sum_major", 10000), "USD", "max_sum")
    txns = _filter_directions(case, cfg.get("directions", ["debit"]))
    findings = []
    for n, hit in enumerate(velocity_scan(txns, window, max_count, max_sum_minor), start=1):
        ratio = max(
            hit.count / max_count if max_count else 0.0,
            hit.sum_minor / max_sum_minor if max_sum_minor else 0.0,
        )
        findings.append(
            AgentFinding(
                agent_id="velocity",
                finding_id=f"velocity:{n}",
                severity="critical" if ratio >= 2.0 else "warn",
                confidence=0.95,
                evidence=_txn_refs(hit.transaction_ids),
                summary=(
                    f"{hit.count} transactions within {int(window.total_seconds() // 60)} minutes "
                    f"breached the velocity limits"
                ),
                metrics={
                    "count": float(hit.count),
                    "window_s": window.total_seconds(),
                    "sum_minor": float(hit.sum_minor),
                },
            )
        )
    return findings


def _agent_country_risk(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    risky = set(cfg.get("countries", []))
    by_country: dict[str, list[str]] = {}
    for txn in case.transactions:
        if txn.counterparty_country in risky:
            by_country.setdefault(txn.counterparty_country, []).append(txn.id)
    findings = []
    min_count = cfg.get("min_count", 1)
    for n, country in enumerate(sorted(by_country), start=1):
        ids = by_country[country]
        findings.append(
            AgentFinding(
                agent_id="country_risk",
                finding_id=f"country_risk:{n}",
                severity=severity_for(len(ids), min_count),
                confidence=0.9,
                evidence=_txn_refs(ids),
                summary=f"{len(ids)} transactions linked to high-risk jurisdiction {country}",
                metrics={"count": float(len(ids))},
            )
        )
    return findings


def _agent_text_content(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    lexicons: dict[str, list[str]] = cfg.get("lexicons", {})
    findings = []
    n = 0
    for lexicon_name in sorted(lexicons):
        terms = [t.lower() for t in lexicons[lexicon_name]]
        evidence: list[EvidenceRef] = []
        matched: list[str] = []

        def scan(text: str, make_ref: Callable[[int, int], EvidenceRef]) -> None:
            lowered = text.lower()
            for term in terms:
                start = 0
                while True:
                    idx = lowered.find(term, start)
                    if idx < 0:
                        break
                    evidence.append(make_ref(idx, idx + len(term)))
                    if term not in matched:
                        matched.append(term)
                    start = idx + 1

        for txn in case.transactions:
            if txn.memo:
                scan(txn.memo, lambda a, b, tid=txn.id: EvidenceRef("text", f"memo:{tid}:{a}-{b}"))
        for i, comm in enumerate(case.communications):
            scan(comm.text, lambda a, b, idx=i: EvidenceRef("text", f"comm:{idx}:{a}-{b}"))
        if not evidence:
            continue
        n += 1
        min_hits = cfg.get("min_hits", 1)
        findings.append(
            AgentFinding(
                agent_id="text_content",
                finding_id=f"text_content:{n}",
                severity=severity_for(len(evidence), min_hits),
                confidence=0.8,
                evidence=tuple(evidence),
                summary=(
                    f"{lexicon_name} language detected in case text "
                    f"({len(evidence)} hits: {', '.join(sorted(matched))})"
                ),
                metrics={"hits": float(len(evidence))},
            )
        )
    return findings


def _agent_geo_anomaly(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    cap = cfg.get("max_speed_kmh", 900)
    findings = []
    for n, pair in enumerate(geo_anomaly_scan(case.transactions, cap), start=1):
        speed = pair.implied_speed_kmh
        findings.append(
            AgentFinding(
                agent_id="geo_anomaly",
                finding_id=f"geo_anomaly:{n}",
                severity="critical" if speed >= 2 * cap else "warn",
                confidence=0.95,
                evidence=_txn_refs([pair.first_txn_id, pair.second_txn_id]),
                summary=(
                    f"impossible travel: {pair.distance_km:.0f} km apart within "
                    f"{pair.elapsed_hours:.1f}h (implied speed over {cap} km/h cap)"
                ),
                metrics={
                    "distance_km": pair.distance_km,
                    "elapsed_h": pair.elapsed_hours,
                    "speed_kmh": speed if speed != float("inf") else -1.0,
                },
            )
        )
    return findings


def _account_stream(case: CaseFile, account_id: str) -> list[Transaction]:
    attributed = [t for t in case.transactions if t.account_id == account_id]
    return attributed or list(case.transactions)


def _agent_account_health(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    dormancy = timedelta(days=cfg.get("dormancy_days", 90))
    burst_window = timedelta(hours=cfg.get("burst_window_hours", 72))
    burst_min = cfg.get("burst_min_count", 3)
    cred_window = timedelta(hours=cfg.get("credential_window_hours", 72))
    spike_min = cfg.get("spike_min_count", 3)
    findings: list[AgentFinding] = []
    n = 0
    for account in case.accounts:
        stream = _account_stream(case, account.id)
        for prev, curr in zip(stream, stream[1:]):
            if curr.timestamp - prev.timestamp < dormancy:
                continue
            burst = [
                t for t in stream
                if curr.timestamp <= t.timestamp <= curr.timestamp + burst_window
            ]
            if len(burst) >= burst_min:
                n += 1
                findings.append(
                    AgentFinding(
                        agent_id="account_health",
                        finding_id=f"account_health:{n}",
                        severity=severity_for(len(burst), burst_min),
                        confidence=0.85,
                        evidence=(EvidenceRef("account", account.id),) + _txn_refs(t.id for t in burst),
                        summary=(
                            f"account {account.id} dormant {int((curr.timestamp - prev.timestamp).days)}d "
                            f"then {len(burst)} transactions in a reactivation burst"
                        ),
                        metrics={"burst_count": float(len(burst)), "gap_days": float((curr.timestamp - prev.timestamp).days)},
                    )
                )
        for idx, event in enumerate(account.events):
            if event.kind not in ("password_change", "device_change"):
                continue
            spike = [
                t for t in stream
                if event.timestamp <= t.timestamp <= event.timestamp + cred_window
            ]
            if len(spike) >= spike_min:
                n += 1
                findings.append(
                    AgentFinding(
                        agent_id="account_health",
                        finding_id=f"account_health:{n}",
                        severity=severity_for(len(spike), spike_min),
                        confidence=0.85,
                        evidence=(EvidenceRef("event", f"{account.id}#{idx}"),) + _txn_refs(t.id for t in spike),
                        summary=(
                            f"{event.kind} on account {account.id} followed by {len(spike)} "
                            f"transactions within {int(cred_window.total_seconds() // 3600)}h"
                        ),
                        metrics={"spike_count": float(len(spike))},
                    )
                )
    return findings


def _agent_dispute_pattern(case: CaseFile, cfg: dict) -> list[AgentFinding]:
    max_ratio = cfg.get("max_ratio", 0.15)
    refs = [
        EvidenceRef("event", f"{account.id}#{idx}")
        for account in case.accounts
        for idx, event in enumerate(account.events)
        if event.kind in ("dispute_filed", "chargeback")
    ]
    if not case.transactions or not refs:
        return []
    ratio = len(refs) / len(case.transactions)
    if ratio <= max_ratio:
        return []
    return [
        AgentFinding(
            agent_id="dispute_pattern",
            finding_id="dispute_pattern:1",
            severity=severity_for(ratio, max_ratio),
            confidence=0.9,
            evidence=tuple(refs),
            summary=(
                f"dispute/chargeback rate {ratio:.0%} across {len(case.transactions)} "
                f"transactions exceeds the {max_ratio:.0%} ceiling"
            ),
            metrics={"ratio": ratio, "dispute_events": float(len(refs))},
        )
    ]


_AGENTS: dict[str, Callable[[CaseFile, dict], list[AgentFinding]]] = {
    "txn_fraud": _agent_txn_fraud,
    "velocity": _agent_velocity,
    "country_risk": _agent_country_risk,
    "text_content": _agent_text_content,
    "geo_anomaly": _agent_geo_anomaly,
    "account_health": _agent_account_health,
    "dispute_pattern": _agent_dispute_pattern,
}

assert set(_AGENTS) == set(AGENT_IDS)


def run_agent(agent_id: str, case_snapshot: CaseFile, config: dict) -> list[AgentFinding]:
    """Dispatch one agent over a masked snapshot.

    ``config`` maps agent ids to their threshold blocks; a missing block
    is a ConfigMissing error, not a silent default.
    """
    if agent_id not in _AGENTS:
        raise UnknownAgent(f"unknown agent {agent_id!r}")
    block = config.get(agent_id)
    if block is None:
        raise ConfigMissing(f"agent {agent_id!r} lacks its threshold block")
    if block.get("test_fail"):
        raise RuntimeError(f"induced test failure in agent {agent_id}")
    return _AGENTS[agent_id](case_snapshot, dict(block))
