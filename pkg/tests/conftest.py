from __future__ import annotations

import json
import random
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import pytest

from sargen.config import load_config, mock_intel_server_entry
from sargen.ingestion.model import (
    AccountEvent,
    AccountRecord,
    AlertMeta,
    CaseFile,
    Communication,
    GeoPoint,
    RiskSignal,
    SubjectProfile,
    Transaction,
)
from sargen.pipeline.runner import run_pipeline

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = FIXTURES / "golden"

BASE_TS = datetime(2024, 2, 1, 9, 0, tzinfo=timezone.utc)


def make_txn(n, ts, amount_major, direction="debit", country="US", channel="wire",
             memo="", geo=None, account_id=None, currency="USD"):
    return Transaction(
        id=f"T-{n:04d}",
        timestamp=ts,
        amount_minor=int(round(amount_major * 100)),
        currency=currency,
        direction=direction,
        counterparty_id=f"CP-{n:04d}",
        counterparty_country=country,
        channel=channel,
        memo=memo,
        geo=geo,
        account_id=account_id,
    )


def make_case(txns=(), subjects=None, accounts=None, communications=(),
              case_id="case-t", detection=date(2024, 3, 1)):
    if accounts is None:
        accounts = (AccountRecord(id="A-1", opened_at=date(2020, 1, 1), status="active"),)
    if subjects is None:
        subjects = (
            SubjectProfile(
                id="S-1", name="Test Person", dob=date(1980, 1, 1),
                address="1 Test Street, Testville, TX 75001",
                national_id="900-11-2233", account_ids=(accounts[0].id,),
                kyc_risk_rating="low",
            ),
        )
    txns = tuple(sorted(txns, key=lambda t: (t.timestamp, t.id)))
    return CaseFile(
        case_id=case_id,
        subjects=tuple(subjects),
        accounts=tuple(accounts),
        transactions=txns,
        communications=tuple(communications),
        risk_signals=(RiskSignal(tag="test", text="synthetic"),),
        alert_meta=AlertMeta(alert_id="AL-T", detection_date=detection, source_system="test"),
    )


COUNTRIES = ["US", "GB", "DE", "MX", "NG", "TR", "FR", "CA", "JP", "BR"]
CHANNELS = ["wire", "ach", "card", "crypto", "p2p", "cash"]
MEMO_WORDS = [
    "invoice", "payment", "transfer", "settlement", "gift cards", "urgent",
    "rent", "payroll", "refund", "consulting", "no questions asked", "supplies",
]


def random_case(rng: random.Random, max_txns: int = 200, case_id: str = "case-r") -> CaseFile:
    """Valid random case for oracle-equivalence and property suites."""
    n_accounts = rng.randint(1, 3)
    accounts = []
    for i in range(n_accounts):
        events = []
        t = BASE_TS - timedelta(days=rng.randint(0, 30))
        for _ in range(rng.randint(0, 6)):
            t += timedelta(hours=rng.randint(1, 200))
            kind = rng.choice(
                ["login", "password_change", "device_change", "limit_change",
                 "dispute_filed", "chargeback"]
            )
            metadata = {}
            if rng.random() < 0.5:
                metadata["device_id"] = f"DEV-{rng.randint(1, 4)}"
            events.append(AccountEvent(kind=kind, timestamp=t, metadata=metadata))
        accounts.append(
            AccountRecord(
                id=f"A-{i + 1}", opened_at=date(2019, 1, 1), status="active",
                events=tuple(events),
            )
        )
    subjects = tuple(
        SubjectProfile(
            id=f"S-{i + 1}", name=f"Person Number{i + 1}", dob=date(1950 + rng.randint(0, 50), 6, 15),
            address=f"{i + 1} Random Road, Sampletown, NY 1000{i}",
            national_id=f"90{i}-22-33{i}4", account_ids=(accounts[i % n_accounts].id,),
            kyc_risk_rating=rng.choice(["low", "medium", "high"]),
        )
        for i in range(rng.randint(1, 2))
    )
    n = rng.randint(0, max_txns)
    txns = []
    t = BASE_TS
    for i in range(n):
        t += timedelta(minutes=rng.randint(0, 240))
        geo = None
        if rng.random() < 0.3:
            geo = GeoPoint(lat=rng.uniform(-80, 80), lon=rng.uniform(-170, 170))
        txns.append(
            make_txn(
                i + 1, t, round(rng.uniform(5, 12000), 2),
                direction=rng.choice(["credit", "debit"]),
                country=rng.choice(COUNTRIES),
                channel=rng.choice(CHANNELS),
                memo=" ".join(rng.sample(MEMO_WORDS, rng.randint(0, 3))),
                geo=geo,
                account_id=rng.choice([a.id for a in accounts] + [None]),
            )
        )
    comms = tuple(
        Communication(
            timestamp=BASE_TS + timedelta(hours=i),
            participants=("Person Number1", "counterpart"),
            text=" ".join(rng.sample(MEMO_WORDS, rng.randint(1, 4))),
        )
        for i in range(rng.randint(0, 3))
    )
    return make_case(txns, subjects=subjects, accounts=tuple(accounts),
                     communications=comms, case_id=case_id)


@pytest.fixture(scope="session")
def mock_config():
    config = load_config()
    config["intel"]["servers"] = [mock_intel_server_entry()]
    return config


@pytest.fixture(scope="session")
def case_01_raw() -> bytes:
    return (FIXTURES / "case_01.json").read_bytes()


@pytest.fixture(scope="session")
def case_02_raw() -> bytes:
    return (FIXTURES / "case_02.json").read_bytes()


@pytest.fixture(scope="session")
def fixture_run(mock_config, case_01_raw):
    """One shared deterministic pipeline run over case_01."""
    return run_pipeline(case_01_raw, mock_config)


@pytest.fixture()
def agent_config(mock_config):
    return json.loads(json.dumps(mock_config["agents"]))
