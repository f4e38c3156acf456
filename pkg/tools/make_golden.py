#!/usr/bin/env python3
"""Build the six-case synthetic golden dataset under fixtures/eval/.

Each case targets a different typology. The reference sections start from
a deterministic pipeline run and receive fixed wording edits, so they read
like an independent author's text while keeping similarity scores stable
and reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path

import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sargen.config import load_config, mock_intel_server_entry  # noqa: E402
from sargen.evaluation.runner import resolved_intro  # noqa: E402
from sargen.narrative.adapter import SECTION_ORDER  # noqa: E402
from sargen.pipeline.runner import run_pipeline  # noqa: E402
from sargen.privacy.masker import unmask  # noqa: E402

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "eval"

REWRITES = [
    ("This report concerns", "This filing identifies"),
    ("totaling", "amounting to"),
    ("were received during the review window", "arrived inside the review window"),
    ("left the account over the same window", "exited the account across the same period"),
    ("The activity spans", "The conduct covers"),
    ("Analysis determined:", "Review established:"),
    ("is consistent with", "aligns with"),
    ("External intelligence:", "Open-source reporting:"),
    ("retained as supporting documentation", "held in the supporting file"),
]


def base_subject(sid: str, name: str, dob: str, address: str, nid: str, accounts: list[str],
                 kyc: str = "low") -> dict:
    return {
        "id": sid, "name": name, "dob": dob, "address": address,
        "national_id": nid, "account_ids": accounts, "kyc_risk_rating": kyc,
    }


def txn(n, ts, amount, direction, cp, country, channel, memo="", account=None):
    doc = {
        "id": f"T-{n:04d}", "timestamp": ts, "amount": amount, "currency": "USD",
        "direction": direction, "counterparty_id": cp, "counterparty_country": country,
        "channel": channel, "memo": memo,
    }
    if account:
        doc["account_id"] = account
    return doc


def case_mule() -> dict:
    a = "ACC-E101"
    txns = [
        txn(1, "2024-03-01T09:00:00Z", "8000.00", "credit", "CP-SRC-1", "US", "wire",
            "contract disbursement", a),
        txn(2, "2024-03-01T10:00:00Z", "8000.00", "credit", "CP-SRC-2", "US", "wire",
            "contract disbursement", a),
    ]
    for i in range(8):
        txns.append(
            txn(3 + i, f"2024-03-01T14:{5 * i:02d}:00Z", "1900.00", "debit",
                f"CP-OUT-{i + 1}", "NG" if i % 2 == 0 else "TR", "p2p", "commission payout", a)
        )
    return {
        "case_id": "eval-mule",
        "subjects": [base_subject("S-E10", "Derek Ossai", "1990-09-12",
                                  "44 Foundry Street, Toledo, OH 43604", "412-55-9031", [a])],
        "accounts": [{"id": a, "opened_at": "2023-02-01", "status": "active", "events": []}],
        "transactions": txns,
        "communications": [
            {"timestamp": "2024-02-29T20:00:00Z", "participants": ["Derek Ossai", "coordinator"],
             "text": "Move it fast and split into smaller sends, no questions asked."}
        ],
        "risk_signals": [{"tag": "alert_rule", "text": "pass-through-ratio"}],
        "alert_meta": {"alert_id": "AL-E101", "detection_date": "2024-03-04",
                       "source_system": "tm-core"},
    }


def case_romance() -> dict:
    a = "ACC-E201"
    txns = [
        txn(1, "2024-04-02T09:00:00Z", "2600.00", "credit", "CP-PAYROLL", "US", "ach",
            "payroll deposit", a),
        txn(2, "2024-04-03T11:00:00Z", "450.00", "debit", "CP-GIFTHUB", "US", "card",
            "gift cards for my fiancé overseas", a),
        txn(3, "2024-04-05T12:30:00Z", "600.00", "debit", "CP-GIFTHUB", "US", "card",
            "more gift cards, he says we will meet soon", a),
        txn(4, "2024-04-08T16:00:00Z", "1200.00", "debit", "CP-REMIT-GH", "GH", "wire",
            "travel help for my love", a),
        txn(5, "2024-04-12T10:00:00Z", "900.00", "debit", "CP-REMIT-GH", "GH", "wire",
            "customs fee he cannot pay", a),
    ]
    return {
        "case_id": "eval-romance",
        "subjects": [base_subject("S-E20", "Carole Whitfield", "1969-05-23",
                                  "980 Sycamore Avenue, Mesa, AZ 85201", "530-71-2248", [a])],
        "accounts": [{"id": a, "opened_at": "2018-07-20", "status": "active", "events": []}],
        "transactions": txns,
        "communications": [
            {"timestamp": "2024-04-04T19:00:00Z",
             "participants": ["Carole Whitfield", "online contact"],
             "text": "My love, the gift cards worked, send the codes for the next batch."}
        ],
        "risk_signals": [{"tag": "alert_rule", "text": "gift-card-pattern"}],
        "alert_meta": {"alert_id": "AL-E201", "detection_date": "2024-04-15",
                       "source_system": "tm-core"},
    }


def case_elder() -> dict:
    a = "ACC-E301"
    txns = [
        txn(1, "2024-05-01T09:30:00Z", "3100.00", "credit", "CP-PENSION", "US", "ach",
            "pension deposit", a),
        txn(2, "2024-05-02T10:15:00Z", "500.00", "debit", "CP-GIFTHUB", "US", "card",
            "urgent, grandson needs gift cards immediately", a),
        txn(3, "2024-05-02T15:40:00Z", "500.00", "debit", "CP-GIFTHUB", "US", "card",
            "prepaid card run, act now they said", a),
        txn(4, "2024-05-06T11:00:00Z", "2000.00", "debit", "CP-WIRECO", "US", "wire",
            "emergency legal retainer", a),
    ]
    return {
        "case_id": "eval-elder",
        "subjects": [base_subject("S-E30", "Harold Jennings", "1948-01-30",
                                  "12 Lakeview Drive, Sarasota, FL 34236", "261-40-8837", [a],
                                  kyc="medium")],
        "accounts": [{"id": a, "opened_at": "2005-03-10", "status": "active", "events": []}],
        "transactions": txns,
        "communications": [
            {"timestamp": "2024-05-02T09:50:00Z", "participants": ["Harold Jennings", "caller"],
             "text": "They told me it is an emergency and to buy gift cards right away."}
        ],
        "risk_signals": [{"tag": "alert_rule", "text": "elder-atypical-spend"}],
        "alert_meta": {"alert_id": "AL-E301", "detection_date": "2024-05-08",
                       "source_system": "tm-core"},
    }


def case_identity() -> dict:
    a = "ACC-E401"
    txns = [
        txn(1, "2024-01-05T10:00:00Z", "120.00", "debit", "CP-GROCER", "US", "card",
            "groceries", a),
        txn(2, "2024-05-20T08:30:00Z", "740.00", "debit", "CP-ELECTRO", "US", "card",
            "electronics", a),
        txn(3, "2024-05-20T09:10:00Z", "810.00", "debit", "CP-ELECTRO", "US", "card",
            "electronics", a),
        txn(4, "2024-05-21T10:45:00Z", "655.00", "debit", "CP-JEWELER", "US", "card",
            "jewelry", a),
        txn(5, "2024-05-22T13:00:00Z", "980.00", "debit", "CP-TRAVELCO", "US", "card",
            "airline tickets", a),
        txn(6, "2024-05-23T09:00:00Z", "75.00", "debit", "CP-GROCER", "US", "card",
            "groceries", a),
        txn(7, "2024-05-24T14:20:00Z", "410.00", "debit", "CP-ELECTRO", "US", "card",
            "electronics", a),
        txn(8, "2024-05-25T16:00:00Z", "95.00", "debit", "CP-FUEL", "US", "card",
            "fuel", a),
    ]
    return {
        "case_id": "eval-identity",
        "subjects": [base_subject("S-E40", "Priya Natarajan", "1983-11-08",
                                  "77 Glenwood Terrace, Aurora, IL 60505", "348-62-5519", [a])],
        "accounts": [
            {
                "id": a,
                "opened_at": "2015-09-01",
                "status": "active",
                "events": [
                    {"kind": "password_change", "timestamp": "2024-05-19T22:00:00Z",
                     "metadata": {"channel": "web"}},
                    {"kind": "device_change", "timestamp": "2024-05-19T22:05:00Z",
                     "metadata": {"device_id": "DEV-UNKNOWN-3"}},
                    {"kind": "dispute_filed", "timestamp": "2024-05-26T10:00:00Z",
                     "metadata": {"transaction_id": "T-0002"}},
                    {"kind": "chargeback", "timestamp": "2024-05-28T10:00:00Z",
                     "metadata": {"transaction_id": "T-0003"}},
                ],
            }
        ],
        "transactions": txns,
        "communications": [
            {"timestamp": "2024-05-26T09:40:00Z", "participants": ["Priya Natarajan", "fraud desk"],
             "text": "I did not make these purchases and I never changed my password."}
        ],
        "risk_signals": [{"tag": "alert_rule", "text": "credential-change-spend-spike"}],
        "alert_meta": {"alert_id": "AL-E401", "detection_date": "2024-05-29",
                       "source_system": "tm-core"},
    }


def case_fraud() -> dict:
    a = "ACC-E501"
    txns = []
    for i in range(6):
        txns.append(
            txn(1 + i, f"2024-06-{3 + i:02d}T10:00:00Z", "260.00", "debit",
                f"CP-MERCH-{i + 1}", "US", "card", "online order", a)
        )
    txns.append(txn(7, "2024-06-10T09:00:00Z", "9300.00", "debit", "CP-VENDOR-A", "US", "wire",
                    "settlement tranche one", a))
    txns.append(txn(8, "2024-06-10T15:00:00Z", "9400.00", "debit", "CP-VENDOR-A", "US", "wire",
                    "settlement tranche two", a))
    txns.append(txn(9, "2024-06-11T09:30:00Z", "9200.00", "debit", "CP-VENDOR-A", "US", "wire",
                    "settlement tranche three", a))
    txns.append(txn(10, "2024-06-12T10:00:00Z", "2200.00", "credit", "CP-REFUND", "US", "ach",
                    "merchant refund", a))
    txns.append(txn(11, "2024-06-13T10:00:00Z", "180.00", "debit", "CP-MERCH-7", "US", "card",
                    "online order", a))
    txns.append(txn(12, "2024-06-14T10:00:00Z", "140.00", "debit", "CP-MERCH-8", "US", "card",
                    "online order", a))
    events = []
    for i in range(4):
        events.append({"kind": "dispute_filed", "timestamp": f"2024-06-{15 + i:02d}T09:00:00Z",
                       "metadata": {"transaction_id": f"T-{1 + i:04d}"}})
    for i in range(2):
        events.append({"kind": "chargeback", "timestamp": f"2024-06-{19 + i:02d}T09:00:00Z",
                       "metadata": {"transaction_id": f"T-{5 + i:04d}"}})
    return {
        "case_id": "eval-fraud",
        "subjects": [base_subject("S-E50", "Marcus Bell", "1979-02-17",
                                  "301 Quarry Road, Reno, NV 89501", "573-20-6614", [a],
                                  kyc="high")],
        "accounts": [{"id": a, "opened_at": "2020-11-11", "status": "active", "events": events}],
        "transactions": txns,
        "communications": [],
        "risk_signals": [{"tag": "alert_rule", "text": "dispute-cluster"}],
        "alert_meta": {"alert_id": "AL-E501", "detection_date": "2024-06-25",
                       "source_system": "tm-core"},
    }


def case_terror() -> dict:
    a = "ACC-E601"
    txns = [
        txn(1, "2024-07-01T09:00:00Z", "9100.00", "debit", "CP-EXCH-1", "TR", "wire",
            "equipment purchase", a),
        txn(2, "2024-07-02T09:30:00Z", "9250.00", "debit", "CP-EXCH-1", "TR", "wire",
            "equipment purchase", a),
        txn(3, "2024-07-03T10:00:00Z", "9150.00", "debit", "CP-EXCH-2", "SY", "wire",
            "equipment purchase", a),
        txn(4, "2024-07-05T14:00:00Z", "3000.00", "debit", "CP-CRYPTO-GATE", "TR", "crypto",
            "token transfer", a),
        txn(5, "2024-07-06T15:00:00Z", "2750.00", "debit", "CP-CRYPTO-GATE", "TR", "crypto",
            "token transfer", a),
        txn(6, "2024-07-08T10:00:00Z", "15000.00", "credit", "CP-COLLECT", "US", "wire",
            "collection proceeds", a),
    ]
    return {
        "case_id": "eval-terror",
        "subjects": [base_subject("S-E60", "Anton Reyes", "1986-06-03",
                                  "15 Dockside Way, Norfolk, VA 23510", "294-83-1107", [a],
                                  kyc="high")],
        "accounts": [{"id": a, "opened_at": "2022-08-19", "status": "active", "events": []}],
        "transactions": txns,
        "communications": [],
        "risk_signals": [{"tag": "alert_rule", "text": "high-risk-corridor-structured"}],
        "alert_meta": {"alert_id": "AL-E601", "detection_date": "2024-07-10",
                       "source_system": "tm-core"},
    }


CASES = {
    "case_mule": case_mule,
    "case_romance": case_romance,
    "case_elder": case_elder,
    "case_identity": case_identity,
    "case_fraud": case_fraud,
    "case_terror": case_terror,
}


def golden_from_run(run) -> dict:
    draft = run.draft()
    intro = resolved_intro(run, draft)
    sections = {}
    for name in SECTION_ORDER:
        text = unmask(draft.section_text(name), run.vault)
        for old, new in REWRITES:
            text = text.replace(old, new)
        sections[name] = text
    return {"golden_intro": intro, "golden_sections": sections}


def main() -> None:
    config = load_config()
    config["intel"]["servers"] = [mock_intel_server_entry()]
    for name, builder in CASES.items():
        directory = OUT / name
        directory.mkdir(parents=True, exist_ok=True)
        doc = builder()
        raw = json.dumps(doc, indent=2) + "\n"
        (directory / "case.json").write_text(raw)
        run = run_pipeline(raw.encode("utf-8"), config)
        assert run.state.stage == "awaiting_review", (name, run.state.stage)
        golden = golden_from_run(run)
        (directory / "golden.json").write_text(json.dumps(golden, indent=2) + "\n")
        print(f"{name}: detected={run.crime_report.detected} verdict={run.report().verdict}")


if __name__ == "__main__":
    main()
