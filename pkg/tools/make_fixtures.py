#!/usr/bin/env python3
"""Regenerate the bundled case fixtures (deterministic, no randomness).

case_01: two subjects, exactly 47 transactions; exhibits structuring,
rapid pass-through, a 12-debit velocity burst, high-risk corridors,
credential changes before the burst, secrecy language, and exactly one
impossible-travel pair. The bundled typology model ranks money_mule first.

case_02: five accounts joined into a single link-graph component via a
chain of shared attributes (addresses, device, common counterparty).
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

SD = {"lat": 32.7157, "lon": -117.1611}       # San Diego
NEWARK = {"lat": 40.7357, "lon": -74.1724}
LISBON = {"lat": 38.7223, "lon": -9.1393}
TOKYO = {"lat": 35.6762, "lon": 139.6503}


def txn(n, ts, amount, direction, cp, country, channel, memo="", geo=None, account=None):
    doc = {
        "id": f"T-{n:04d}",
        "timestamp": ts,
        "amount": amount,
        "currency": "USD",
        "direction": direction,
        "counterparty_id": cp,
        "counterparty_country": country,
        "channel": channel,
        "memo": memo,
    }
    if geo:
        doc["geo"] = geo
    if account:
        doc["account_id"] = account
    return doc


def case_01() -> dict:
    a1, a2 = "ACC-1001", "ACC-2002"
    txns = []
    n = 0

    def add(*args, **kwargs):
        nonlocal n
        n += 1
        txns.append(txn(n, *args, **kwargs))

    # ACC-1001 ordinary activity, Jan 3 - Feb 1
    add("2024-01-03T09:15:00Z", "2400.00", "credit", "CP-EMPLOYER", "US", "ach",
        "payroll deposit", account=a1)
    add("2024-01-04T18:20:00Z", "86.12", "debit", "CP-GROCER", "US", "card",
        "groceries", geo=SD, account=a1)
    add("2024-01-06T12:00:00Z", "142.50", "debit", "CP-WHOLESALE", "US", "card",
        "household goods", geo=SD, account=a1)
    add("2024-01-08T10:05:00Z", "59.99", "debit", "CP-STREAMCO", "US", "card",
        "subscription renewal", account=a1)
    add("2024-01-10T16:45:00Z", "800.00", "debit", "CP-LANDLORD", "US", "ach",
        "rent part one", account=a1)
    add("2024-01-12T11:30:00Z", "230.40", "debit", "CP-HARDWARE", "US", "card",
        "tools", geo=SD, account=a1)
    add("2024-01-14T09:00:00Z", "120.00", "credit", "CP-FRIEND-2", "US", "p2p",
        "shared dinner payback", account=a1)
    add("2024-01-16T20:15:00Z", "64.75", "debit", "CP-DINER", "US", "card",
        "dinner", account=a1)
    add("2024-01-18T13:40:00Z", "410.00", "debit", "CP-AUTOSHOP", "US", "wire",
        "car repair", account=a1)
    add("2024-01-20T15:00:00Z", "95.20", "debit", "CP-PHARMA", "US", "card",
        "pharmacy", geo=SD, account=a1)
    add("2024-01-22T08:30:00Z", "2400.00", "credit", "CP-EMPLOYER", "US", "ach",
        "payroll deposit", account=a1)
    add("2024-01-24T19:10:00Z", "180.00", "debit", "CP-UTILITYCO", "US", "ach",
        "electricity", account=a1)
    add("2024-01-26T12:25:00Z", "75.30", "debit", "CP-GROCER", "US", "card",
        "groceries", account=a1)
    add("2024-01-28T17:50:00Z", "310.45", "debit", "CP-OUTFITTER", "US", "card",
        "outdoor gear", geo=SD, account=a1)
    add("2024-01-30T10:10:00Z", "47.80", "debit", "CP-CAFE", "US", "card",
        "coffee supplies", account=a1)
    add("2024-02-01T09:00:00Z", "1200.00", "debit", "CP-LANDLORD", "US", "ach",
        "rent part two", account=a1)

    # Structuring: three wires just below the reporting threshold within 47h
    add("2024-02-02T10:00:00Z", "9900.00", "debit", "CP-REMIT-MX", "MX", "wire",
        "invoice settlement batch A", account=a1)
    add("2024-02-03T16:00:00Z", "9800.00", "debit", "CP-REMIT-MX", "MX", "wire",
        "invoice settlement batch B", account=a1)
    add("2024-02-04T09:00:00Z", "9950.00", "debit", "CP-REMIT-MX", "MX", "wire",
        "invoice settlement batch C", account=a1)

    # Mule inflow: three shell-company wires
    for i, ts in enumerate(
        ["2024-02-08T09:00:00Z", "2024-02-08T09:20:00Z", "2024-02-08T09:40:00Z"], start=1
    ):
        add(ts, "10000.00", "credit", f"CP-SHELL-{i}", "US", "wire",
            "project disbursement", account=a1)

    # Mule outflow burst: twelve p2p debits inside one hour
    for i in range(12):
        minute = 5 * i
        country = "NG" if i % 2 == 0 else "TR"
        add(f"2024-02-08T13:{minute:02d}:00Z", "2500.00", "debit",
            f"CP-MULE-{i + 1:02d}", country, "p2p", "commission payout", account=a1)

    # Impossible travel pair
    add("2024-02-09T10:00:00Z", "120.00", "debit", "CP-LIS-CAFE", "PT", "card",
        "card purchase", geo=LISBON, account=a1)
    add("2024-02-09T12:00:00Z", "85.50", "debit", "CP-TYO-STORE", "JP", "card",
        "card purchase", geo=TOKYO, account=a1)

    # ACC-2002 ordinary activity
    add("2024-01-05T10:00:00Z", "1850.00", "credit", "CP-CLINIC", "US", "ach",
        "payroll deposit", account=a2)
    add("2024-01-07T12:30:00Z", "65.20", "debit", "CP-BOOKSHOP", "US", "card",
        "books", geo=NEWARK, account=a2)
    add("2024-01-09T14:00:00Z", "120.99", "debit", "CP-GROCER-NJ", "US", "card",
        "groceries", account=a2)
    add("2024-01-11T09:45:00Z", "230.00", "debit", "CP-INSURER", "US", "ach",
        "insurance premium", account=a2)
    add("2024-01-15T16:20:00Z", "89.99", "debit", "CP-GADGETS", "US", "card",
        "unrecognized charge", account=a2)
    add("2024-01-19T10:00:00Z", "1850.00", "credit", "CP-CLINIC", "US", "ach",
        "payroll deposit", account=a2)
    add("2024-01-21T11:00:00Z", "49.99", "debit", "CP-STREAMCO", "US", "card",
        "subscription renewal", account=a2)
    add("2024-01-25T13:10:00Z", "310.00", "debit", "CP-DENTIST", "US", "wire",
        "dental work", account=a2)
    add("2024-01-29T15:30:00Z", "72.40", "debit", "CP-GROCER-NJ", "US", "card",
        "groceries", geo=NEWARK, account=a2)
    add("2024-02-03T10:30:00Z", "140.25", "debit", "CP-SALON", "US", "card",
        "salon", account=a2)
    add("2024-02-06T09:30:00Z", "60.00", "credit", "CP-FRIEND-7", "US", "p2p",
        "carpool share", account=a2)

    assert n == 47, n

    return {
        "case_id": "case-01",
        "subjects": [
            {
                "id": "S-001",
                "name": "John Smith",
                "dob": "1961-03-14",
                "address": "1200 Harbor Blvd Apt 4, San Diego, CA 92101",
                "national_id": "523-44-1290",
                "account_ids": ["ACC-1001"],
                "kyc_risk_rating": "medium",
            },
            {
                "id": "S-002",
                "name": "Maria Delgado",
                "dob": "1988-07-02",
                "address": "88 Pine Street, Newark, NJ 07102",
                "national_id": "641-80-7733",
                "account_ids": ["ACC-2002"],
                "kyc_risk_rating": "low",
            },
        ],
        "accounts": [
            {
                "id": "ACC-1001",
                "opened_at": "2019-05-20",
                "status": "active",
                "events": [
                    {"kind": "login", "timestamp": "2024-01-02T08:00:00Z",
                     "metadata": {"device_id": "DEV-11", "ip": "203.0.113.4"}},
                    {"kind": "password_change", "timestamp": "2024-02-06T09:00:00Z",
                     "metadata": {"channel": "web"}},
                    {"kind": "device_change", "timestamp": "2024-02-06T09:05:00Z",
                     "metadata": {"device_id": "DEV-77"}},
                    {"kind": "login", "timestamp": "2024-02-08T08:55:00Z",
                     "metadata": {"device_id": "DEV-77"}},
                ],
            },
            {
                "id": "ACC-2002",
                "opened_at": "2021-11-03",
                "status": "active",
                "events": [
                    {"kind": "login", "timestamp": "2024-01-15T10:00:00Z",
                     "metadata": {"device_id": "DEV-52"}},
                    {"kind": "dispute_filed", "timestamp": "2024-01-20T09:30:00Z",
                     "metadata": {"transaction_id": "T-0040"}},
                ],
            },
        ],
        "transactions": txns,
        "communications": [
            {
                "timestamp": "2024-02-07T18:00:00Z",
                "participants": ["John Smith", "overseas handler"],
                "text": "Please move the funds quickly, split into smaller wires so it stays under the radar.",
            },
            {
                "timestamp": "2024-01-21T15:00:00Z",
                "participants": ["Maria Delgado", "card services"],
                "text": "I did not authorize the gadget charge and I am filing a dispute.",
            },
        ],
        "risk_signals": [
            {"tag": "alert_rule", "text": "velocity-outbound-p2p"},
            {"tag": "kyc", "text": "recent credential changes on primary account"},
        ],
        "alert_meta": {
            "alert_id": "AL-3921",
            "detection_date": "2024-02-10",
            "source_system": "tm-core",
        },
    }


def case_02() -> dict:
    subjects = []
    accounts = []
    addresses = {
        "S-201": "14 Cedar Lane, Trenton, NJ 08601",
        "S-202": "14 Cedar Lane, Trenton, NJ 08601",
        "S-203": "310 Birch Road, Camden, NJ 08102",
        "S-204": "310 Birch Road, Camden, NJ 08102",
        "S-205": "7 Ash Court, Paterson, NJ 07501",
    }
    for i in range(1, 6):
        sid = f"S-20{i}"
        acct = f"ACC-2{i:02d}"
        subjects.append(
            {
                "id": sid,
                "name": f"Holder Number{i}",
                "dob": f"19{70 + i}-04-0{i}",
                "address": addresses[sid],
                "national_id": f"52{i}-33-10{i}0",
                "account_ids": [acct],
                "kyc_risk_rating": "low",
            }
        )
        events = []
        if acct in ("ACC-202", "ACC-203"):
            events.append(
                {"kind": "login", "timestamp": "2024-01-10T08:00:00Z",
                 "metadata": {"device_id": "DEV-SHARED-9"}}
            )
        accounts.append(
            {"id": acct, "opened_at": "2022-03-15", "status": "active", "events": events}
        )
    txns = [
        txn(1, "2024-01-12T10:00:00Z", "400.00", "debit", "CP-HUB-7", "US", "ach",
            "club dues", account="ACC-204"),
        txn(2, "2024-01-13T10:00:00Z", "400.00", "debit", "CP-HUB-7", "US", "ach",
            "club dues", account="ACC-205"),
    ]
    return {
        "case_id": "case-02",
        "subjects": subjects,
        "accounts": accounts,
        "transactions": txns,
        "communications": [],
        "risk_signals": [{"tag": "alert_rule", "text": "linked-account-review"}],
        "alert_meta": {
            "alert_id": "AL-4410",
            "detection_date": "2024-02-01",
            "source_system": "tm-core",
        },
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "case_01.json").write_text(json.dumps(case_01(), indent=2) + "\n")
    (OUT / "case_02.json").write_text(json.dumps(case_02(), indent=2) + "\n")
    print(f"wrote {OUT / 'case_01.json'} and {OUT / 'case_02.json'}")


if __name__ == "__main__":
    main()
