"""Alert parsing: raw bytes -> validated CaseFile.

The canonical interchange format is the JSON schema shipped at
``schemas/case.schema.json``. A CSV bundle is a directory of per-entity
CSV files mapped onto the same schema (see ``read_csv_bundle``).
Validation rejects rather than repairs; only two canonicalizations are
applied (they are idempotent on already-canonical input): timestamps are
normalized to UTC and time-ordered lists are sorted.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import date, datetime, timezone
from typing import Any, Mapping

from ..errors import DanglingReference, MalformedInput, SchemaViolation
from .model import (
    ACCOUNT_STATUSES,
    CHANNELS,
    DIRECTIONS,
    EVENT_KINDS,
    KYC_RATINGS,
    AccountEvent,
    AccountRecord,
    AlertMeta,
    CaseFile,
    Communication,
    GeoPoint,
    RiskSignal,
    SubjectProfile,
    Transaction,
    format_major,
    parse_date,
    parse_utc,
    to_minor_units,
)

_TXN_FIELDS = {
    "id", "timestamp", "amount", "currency", "direction", "counterparty_id",
    "counterparty_country", "channel", "memo", "geo", "account_id",
}
_SUBJECT_FIELDS = {"id", "name", "dob", "address", "national_id", "account_ids", "kyc_risk_rating"}
_ACCOUNT_FIELDS = {"id", "opened_at", "status", "events"}


def _require(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj or obj[key] is None:
        raise SchemaViolation(f"{path}.{key}" if path else key, "missing mandatory field")
    return obj[key]


def _require_str(obj: Mapping[str, Any], key: str, path: str) -> str:
    value = _require(obj, key, path)
    if not isinstance(value, str) or not value:
        raise SchemaViolation(f"{path}.{key}" if path else key, "expected non-empty string")
    return value


def _enum(value: str, allowed: tuple[str, ...], path: str) -> str:
    if value not in allowed:
        raise SchemaViolation(path, f"{value!r} not one of {allowed}")
    return value


def _extensions(obj: Mapping[str, Any], known: set[str]) -> dict[str, Any]:
    # Unknown fields are preserved, never dropped: audit trails must not
    # lose source data.
    ext = {k: v for k, v in obj.items() if k not in known}
    declared = obj.get("extensions")
    if isinstance(declared, dict):
        ext.pop("extensions", None)
        ext.update(declared)
    return ext


def _parse_transaction(obj: Any, path: str) -> Transaction:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected object")
    txn_id = _require_str(obj, "id", path)
    ts, offset = parse_utc(_require(obj, "timestamp", path), f"{path}.timestamp")
    currency = _require_str(obj, "currency", path)
    if len(currency) != 3 or not currency.isalpha() or not currency.isupper():
        raise SchemaViolation(f"{path}.currency", f"not an ISO-4217 code: {currency!r}")
    amount = to_minor_units(_require(obj, "amount", path), currency, f"{path}.amount")
    direction = _enum(_require_str(obj, "direction", path), DIRECTIONS, f"{path}.direction")
    channel = _enum(_require_str(obj, "channel", path), CHANNELS, f"{path}.channel")
    country = _require_str(obj, "counterparty_country", path)
    if len(country) != 2 or not country.isalpha() or not country.isupper():
        raise SchemaViolation(f"{path}.counterparty_country", f"not ISO-3166 alpha-2: {country!r}")
    geo = None
    if obj.get("geo") is not None:
        g = obj["geo"]
        if not isinstance(g, dict) or "lat" not in g or "lon" not in g:
            raise SchemaViolation(f"{path}.geo", "expected {lat, lon}")
        lat, lon = float(g["lat"]), float(g["lon"])
        if not -90.0 <= lat <= 90.0:
            raise SchemaViolation(f"{path}.geo.lat", f"latitude out of range: {lat}")
        if not -180.0 <= lon <= 180.0:
            raise SchemaViolation(f"{path}.geo.lon", f"longitude out of range: {lon}")
        geo = GeoPoint(lat=lat, lon=lon)
    memo = obj.get("memo", "")
    if not isinstance(memo, str):
        raise SchemaViolation(f"{path}.memo", "expected string")
    account_id = obj.get("account_id")
    if account_id is not None and not isinstance(account_id, str):
        raise SchemaViolation(f"{path}.account_id", "expected string")
    ext = _extensions(obj, _TXN_FIELDS)
    if offset != 0:
        ext["tz_offset_minutes"] = offset
    return Transaction(
        id=txn_id,
        timestamp=ts,
        amount_minor=amount,
        currency=currency,
        direction=direction,
        counterparty_id=_require_str(obj, "counterparty_id", path),
        counterparty_country=country,
        channel=channel,
        memo=memo,
        geo=geo,
        account_id=account_id,
        extensions=ext,
    )


def _parse_subject(obj: Any, path: str) -> SubjectProfile:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected object")
    account_ids = _require(obj, "account_ids", path)
    if not isinstance(account_ids, list) or not all(isinstance(a, str) for a in account_ids):
        raise SchemaViolation(f"{path}.account_ids", "expected list of strings")
    return SubjectProfile(
        id=_require_str(obj, "id", path),
        name=_require_str(obj, "name", path),
        dob=parse_date(_require(obj, "dob", path), f"{path}.dob"),
        address=_require_str(obj, "address", path),
        national_id=_require_str(obj, "national_id", path),
        account_ids=tuple(account_ids),
        kyc_risk_rating=_enum(
            _require_str(obj, "kyc_risk_rating", path), KYC_RATINGS, f"{path}.kyc_risk_rating"
        ),
        extensions=_extensions(obj, _SUBJECT_FIELDS),
    )


def _parse_account(obj: Any, path: str) -> AccountRecord:
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected object")
    events = []
    for i, ev in enumerate(obj.get("events", [])):
        ev_path = f"{path}.events[{i}]"
        if not isinstance(ev, dict):
            raise SchemaViolation(ev_path, "expected object")
        kind = _enum(_require_str(ev, "kind", ev_path), EVENT_KINDS, f"{ev_path}.kind")
        ts, _ = parse_utc(_require(ev, "timestamp", ev_path), f"{ev_path}.timestamp")
        metadata = ev.get("metadata", {})
        if not isinstance(metadata, dict):
            raise SchemaViolation(f"{ev_path}.metadata", "expected object")
        events.append(AccountEvent(kind=kind, timestamp=ts, metadata=metadata))
    events.sort(key=lambda e: (e.timestamp, e.kind))
    return AccountRecord(
        id=_require_str(obj, "id", path),
        opened_at=parse_date(_require(obj, "opened_at", path), f"{path}.opened_at"),
        status=_enum(_require_str(obj, "status", path), ACCOUNT_STATUSES, f"{path}.status"),
        events=tuple(events),
        extensions=_extensions(obj, _ACCOUNT_FIELDS),
    )


def build_case(doc: Mapping[str, Any], *, now: datetime | None = None) -> CaseFile:
    """Validate a decoded case document and construct the CaseFile."""
    if not isinstance(doc, Mapping):
        raise SchemaViolation("", "top-level value must be an object")
    case_id = _require_str(doc, "case_id", "")

    raw_subjects = _require(doc, "subjects", "")
    if not isinstance(raw_subjects, list) or not raw_subjects:
        raise SchemaViolation("subjects", "at least one subject is required")
    subjects = [_parse_subject(s, f"subjects[{i}]") for i, s in enumerate(raw_subjects)]
    seen_ids: set[str] = set()
    for i, subj in enumerate(subjects):
        if subj.id in seen_ids:
            raise SchemaViolation(f"subjects[{i}].id", f"duplicate subject id {subj.id!r}")
        seen_ids.add(subj.id)

    raw_accounts = doc.get("accounts", [])
    if not isinstance(raw_accounts, list):
        raise SchemaViolation("accounts", "expected list")
    accounts = [_parse_account(a, f"accounts[{i}]") for i, a in enumerate(raw_accounts)]
    account_ids = {a.id for a in accounts}
    if len(account_ids) != len(accounts):
        raise SchemaViolation("accounts", "duplicate account ids")

    for i, subj in enumerate(subjects):
        for j, acct_id in enumerate(subj.account_ids):
            if acct_id not in account_ids:
                raise DanglingReference(f"subjects[{i}].account_ids[{j}]", acct_id)

    raw_txns = doc.get("transactions", [])
    if not isinstance(raw_txns, list):
        raise SchemaViolation("transactions", "expected list")
    transactions = [_parse_transaction(t, f"transactions[{i}]") for i, t in enumerate(raw_txns)]
    txn_ids = set()
    for i, txn in enumerate(transactions):
        if txn.id in txn_ids:
            raise SchemaViolation(f"transactions[{i}].id", f"duplicate transaction id {txn.id!r}")
        txn_ids.add(txn.id)
        if txn.account_id is not None and txn.account_id not in account_ids:
            raise DanglingReference(f"transactions[{i}].account_id", txn.account_id)
    transactions.sort(key=lambda t: (t.timestamp, t.id))

    communications = []
    for i, comm in enumerate(doc.get("communications", [])):
        path = f"communications[{i}]"
        if not isinstance(comm, dict):
            raise SchemaViolation(path, "expected object")
        ts, _ = parse_utc(_require(comm, "timestamp", path), f"{path}.timestamp")
        participants = _require(comm, "participants", path)
        if not isinstance(participants, list) or not all(isinstance(p, str) for p in participants):
            raise SchemaViolation(f"{path}.participants", "expected list of strings")
        text = _require(comm, "text", path)
        if not isinstance(text, str):
            raise SchemaViolation(f"{path}.text", "expected string")
        communications.append(
            Communication(timestamp=ts, participants=tuple(participants), text=text)
        )
    communications.sort(key=lambda c: c.timestamp)

    risk_signals = []
    for i, sig in enumerate(doc.get("risk_signals", [])):
        path = f"risk_signals[{i}]"
        if not isinstance(sig, dict):
            raise SchemaViolation(path, "expected object with tag and text")
        risk_signals.append(
            RiskSignal(tag=_require_str(sig, "tag", path), text=_require_str(sig, "text", path))
        )

    alert_meta = None
    if doc.get("alert_meta") is not None:
        meta = doc["alert_meta"]
        if not isinstance(meta, Mapping):
            raise SchemaViolation("alert_meta", "expected object")
        detection = parse_date(_require(meta, "detection_date", "alert_meta"), "alert_meta.detection_date")
        today = (now or datetime.now(timezone.utc)).date()
        if detection > today:
            raise SchemaViolation("alert_meta.detection_date", f"{detection} is in the future")
        alert_meta = AlertMeta(
            alert_id=_require_str(meta, "alert_id", "alert_meta"),
            detection_date=detection,
            source_system=_require_str(meta, "source_system", "alert_meta"),
        )

    known_top = {
        "case_id", "subjects", "accounts", "transactions",
        "communications", "risk_signals", "alert_meta",
    }
    return CaseFile(
        case_id=case_id,
        subjects=tuple(subjects),
        accounts=tuple(accounts),
        transactions=tuple(transactions),
        communications=tuple(communications),
        risk_signals=tuple(risk_signals),
        alert_meta=alert_meta,
        extensions=_extensions(doc, known_top),
    )


def parse_alert(raw: bytes | Mapping[str, bytes], fmt: str = "json",
                *, now: datetime | None = None) -> CaseFile:
    """Parse raw alert input into a validated CaseFile.

    ``fmt="json"`` takes the canonical JSON document as bytes;
    ``fmt="csv-bundle"`` takes a mapping of entity name -> CSV bytes as
    produced by ``read_csv_bundle``.
    """
    if fmt == "json":
        if not isinstance(raw, (bytes, bytearray)):
            raise MalformedInput("json format requires bytes input")
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedInput(f"input is not valid JSON: {exc}") from exc
        return build_case(doc, now=now)
    if fmt == "csv-bundle":
        if not isinstance(raw, Mapping):
            raise MalformedInput("csv-bundle format requires a mapping of entity name -> bytes")
        return build_case(_bundle_to_doc(raw), now=now)
    raise MalformedInput(f"unknown format {fmt!r}")


def _rows(raw: Mapping[str, bytes], entity: str) -> list[dict[str, str]]:
    data = raw.get(entity)
    if data is None:
        return []
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"{entity}.csv is not UTF-8") from exc
    try:
        return list(csv.DictReader(io.StringIO(text)))
    except csv.Error as exc:
        raise MalformedInput(f"{entity}.csv is not parseable CSV: {exc}") from exc


def _bundle_to_doc(raw: Mapping[str, bytes]) -> dict[str, Any]:
    """Map the per-entity CSV bundle onto the canonical JSON document."""
    alert_rows = _rows(raw, "alert")
    if not alert_rows:
        raise MalformedInput("csv bundle is missing alert.csv")
    head = alert_rows[0]
    doc: dict[str, Any] = {"case_id": head.get("case_id", "")}
    if head.get("alert_id"):
        doc["alert_meta"] = {
            "alert_id": head.get("alert_id"),
            "detection_date": head.get("detection_date"),
            "source_system": head.get("source_system"),
        }

    doc["subjects"] = [
        {
            "id": row.get("id"),
            "name": row.get("name"),
            "dob": row.get("dob"),
            "address": row.get("address"),
            "national_id": row.get("national_id"),
            "account_ids": [a for a in (row.get("account_ids") or "").split(";") if a],
            "kyc_risk_rating": row.get("kyc_risk_rating"),
        }
        for row in _rows(raw, "subjects")
    ]

    events_by_account: dict[str, list[dict[str, Any]]] = {}
    for row in _rows(raw, "account_events"):
        meta = json.loads(row["metadata"]) if row.get("metadata") else {}
        events_by_account.setdefault(row.get("account_id", ""), []).append(
            {"kind": row.get("kind"), "timestamp": row.get("timestamp"), "metadata": meta}
        )
    doc["accounts"] = [
        {
            "id": row.get("id"),
            "opened_at": row.get("opened_at"),
            "status": row.get("status"),
            "events": events_by_account.get(row.get("id", ""), []),
        }
        for row in _rows(raw, "accounts")
    ]

    transactions = []
    for row in _rows(raw, "transactions"):
        txn: dict[str, Any] = {
            "id": row.get("id"),
            "timestamp": row.get("timestamp"),
            "amount": row.get("amount"),
            "currency": row.get("currency"),
            "direction": row.get("direction"),
            "counterparty_id": row.get("counterparty_id"),
            "counterparty_country": row.get("counterparty_country"),
            "channel": row.get("channel"),
            "memo": row.get("memo", ""),
        }
        if row.get("account_id"):
            txn["account_id"] = row["account_id"]
        if row.get("lat") and row.get("lon"):
            txn["geo"] = {"lat": float(row["lat"]), "lon": float(row["lon"])}
        transactions.append(txn)
    doc["transactions"] = transactions

    doc["communications"] = [
        {
            "timestamp": row.get("timestamp"),
            "participants": [p for p in (row.get("participants") or "").split(";") if p],
            "text": row.get("text"),
        }
        for row in _rows(raw, "communications")
    ]
    doc["risk_signals"] = [
        {"tag": row.get("tag"), "text": row.get("text")} for row in _rows(raw, "risk_signals")
    ]
    return doc


def read_csv_bundle(directory: str) -> dict[str, bytes]:
    """Read a CSV bundle directory into the mapping parse_alert expects."""
    from pathlib import Path

    base = Path(directory)
    if not base.is_dir():
        raise MalformedInput(f"{directory} is not a directory")
    bundle = {}
    for entity in ("alert", "subjects", "accounts", "account_events",
                   "transactions", "communications", "risk_signals"):
        path = base / f"{entity}.csv"
        if path.exists():
            bundle[entity] = path.read_bytes()
    return bundle


def case_to_doc(case: CaseFile) -> dict[str, Any]:
    """Serialize a CaseFile back to the canonical JSON document shape."""

    def txn_doc(t: Transaction) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": t.id,
            "timestamp": _iso(t.timestamp),
            "amount": t.amount_major,
            "currency": t.currency,
            "direction": t.direction,
            "counterparty_id": t.counterparty_id,
            "counterparty_country": t.counterparty_country,
            "channel": t.channel,
            "memo": t.memo,
        }
        if t.geo is not None:
            d["geo"] = {"lat": t.geo.lat, "lon": t.geo.lon}
        if t.account_id is not None:
            d["account_id"] = t.account_id
        if t.extensions:
            d["extensions"] = dict(t.extensions)
        return d

    doc: dict[str, Any] = {
        "case_id": case.case_id,
        "subjects": [
            {
                "id": s.id,
                "name": s.name,
                "dob": s.dob.isoformat(),
                "address": s.address,
                "national_id": s.national_id,
                "account_ids": list(s.account_ids),
                "kyc_risk_rating": s.kyc_risk_rating,
                **({"extensions": dict(s.extensions)} if s.extensions else {}),
            }
            for s in case.subjects
        ],
        "accounts": [
            {
                "id": a.id,
                "opened_at": a.opened_at.isoformat(),
                "status": a.status,
                "events": [
                    {
                        "kind": e.kind,
                        "timestamp": _iso(e.timestamp),
                        "metadata": dict(e.metadata),
                    }
                    for e in a.events
                ],
                **({"extensions": dict(a.extensions)} if a.extensions else {}),
            }
            for a in case.accounts
        ],
        "transactions": [txn_doc(t) for t in case.transactions],
        "communications": [
            {
                "timestamp": _iso(c.timestamp),
                "participants": list(c.participants),
                "text": c.text,
            }
            for c in case.communications
        ],
        "risk_signals": [{"tag": r.tag, "text": r.text} for r in case.risk_signals],
    }
    if case.alert_meta is not None:
        doc["alert_meta"] = {
            "alert_id": case.alert_meta.alert_id,
            "detection_date": case.alert_meta.detection_date.isoformat(),
            "source_system": case.alert_meta.source_system,
        }
    if case.extensions:
        doc["extensions"] = dict(case.extensions)
    return doc


def serialize_case(case: CaseFile) -> bytes:
    return json.dumps(case_to_doc(case), indent=2, sort_keys=False).encode("utf-8")


def _iso(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")
