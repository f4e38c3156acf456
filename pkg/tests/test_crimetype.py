from __future__ import annotations

import json
import math
import random
from datetime import timedelta

import pytest

from sargen.crimetype import (
    TYPOLOGIES,
    EvidenceRef,
    RiskIndicator,
    classify,
    extract_indicators,
    logistic,
    resolve_evidence,
    score_typologies,
)
from sargen.errors import RegistryInvalid, UnknownIndicator
from sargen.ingestion import parse_alert

from .conftest import BASE_TS, make_case, make_txn
from .oracles import structuring_oracle


@pytest.fixture(scope="module")
def registry(mock_config):
    return mock_config["crimetype"]["registry"]


@pytest.fixture(scope="module")
def model(mock_config):
    return mock_config["crimetype"]["model"]


@pytest.fixture(scope="module")
def mock_config():
    from sargen.config import load_config

    return load_config()


def test_structuring_rule_fires_with_three_evidence_ids(registry):
    txns = [
        make_txn(1, BASE_TS, 9900),
        make_txn(2, BASE_TS + timedelta(hours=30), 9800),
        make_txn(3, BASE_TS + timedelta(hours=47), 9950),
    ]
    case = make_case(txns)
    indicators = extract_indicators(case, registry)
    structuring = [i for i in indicators if i.id == "structuring_below_threshold"]
    assert len(structuring) == 1
    assert len(structuring[0].evidence) == 3
    assert structuring[0].strength == 1.0
    oracle_ids = structuring_oracle(case.transactions, 9000, 10000, 3, timedelta(hours=72))
    assert sorted(e.ref for e in structuring[0].evidence) == oracle_ids


def test_empty_case_yields_no_indicators(registry):
    assert extract_indicators(make_case([]), registry) == []


def test_lexicon_rules_fire_on_memo(registry):
    txns = [make_txn(1, BASE_TS, 100, memo="gift cards for my new fiancé overseas")]
    indicators = extract_indicators(make_case(txns), registry)
    ids = {i.id for i in indicators}
    assert "romance_lexicon_hit" in ids
    assert "gift_card_mention" in ids


def test_evidence_resolves_into_case(registry, case_01_raw):
    case = parse_alert(case_01_raw, "json")
    for indicator in extract_indicators(case, registry):
        for ref in indicator.evidence:
            assert resolve_evidence(case, ref), (indicator.id, ref)


def test_registry_unknown_impl_rejected():
    bad = {"version": "x", "rules": [
        {"id": "r1", "category": "content", "impl": "does_not_exist", "params": {}}
    ]}
    with pytest.raises(RegistryInvalid):
        extract_indicators(make_case([]), bad)


def test_registry_missing_params_rejected(registry):
    bad = json.loads(json.dumps(registry))
    del bad["rules"][0]["params"]["min_count"]
    txns = [make_txn(1, BASE_TS, 9900)] * 1
    with pytest.raises(RegistryInvalid):
        extract_indicators(make_case(txns), bad)


def _indicator(iid, strength=1.0):
    return RiskIndicator(
        id=iid, category="content",
        evidence=(EvidenceRef("transaction", "T-0001"),), strength=strength,
    )


def test_empty_indicators_all_prior(model):
    scores = score_typologies([], model)
    assert len(scores) == len(TYPOLOGIES)
    for s in scores:
        assert s.probability == pytest.approx(logistic(-4.0))
        assert abs(s.probability - 0.018) < 1e-3


def test_zero_model_ties_break_by_enum_order():
    model = {
        "version": "zero",
        "indicator_ids": ["a"],
        "typologies": {t: {"bias": 0.0, "weights": {}} for t in TYPOLOGIES},
    }
    scores = score_typologies([_indicator("a")], model)
    assert all(s.probability == 0.5 for s in scores)
    assert [s.typology for s in scores] == list(TYPOLOGIES)
    assert [s.rank for s in scores] == list(range(1, len(TYPOLOGIES) + 1))


def test_unknown_indicator_rejected(model):
    with pytest.raises(UnknownIndicator):
        score_typologies([_indicator("not_in_model")], model)


def test_fixture_ranking_matches_independent_recomputation(case_01_raw, registry, model):
    """Spreadsheet-style oracle: recompute every probability from the JSON
    weights with plain arithmetic, independent of the scoring module."""
    case = parse_alert(case_01_raw, "json")
    indicators = extract_indicators(case, registry)
    scores = score_typologies(indicators, model)

    strengths = {i.id: i.strength for i in indicators}
    expected = []
    for typology in TYPOLOGIES:
        block = model["typologies"][typology]
        z = block["bias"]
        for iid, weight in block["weights"].items():
            z += weight * strengths.get(iid, 0.0)
        expected.append((typology, 1.0 / (1.0 + math.exp(-z))))
    expected.sort(key=lambda p: (-p[1], TYPOLOGIES.index(p[0])))

    assert [(s.typology, s.rank) for s in scores] == [
        (t, i + 1) for i, (t, _) in enumerate(expected)
    ]
    for s, (_, p) in zip(scores, expected):
        assert s.probability == pytest.approx(p, abs=1e-12)
    assert scores[0].typology == "money_mule"


def test_classify_carries_versions_and_detected(case_01_raw, registry, model):
    case = parse_alert(case_01_raw, "json")
    report = classify(case, registry, model)
    assert report.model_version == model["version"]
    assert report.registry_version == registry["version"]
    assert report.detected == ("money_mule",)
    assert [s.rank for s in report.scores] == list(range(1, len(TYPOLOGIES) + 1))


def _random_model(rng: random.Random, indicator_ids):
    return {
        "version": "rand",
        "indicator_ids": list(indicator_ids),
        "typologies": {
            t: {
                "bias": rng.uniform(-5, 2),
                "weights": {
                    i: rng.uniform(0, 3) for i in indicator_ids if rng.random() < 0.6
                },
            }
            for t in TYPOLOGIES
        },
    }


def test_monotonicity_property():
    """Adding a positively weighted indicator never decreases that
    typology's probability (1000 random trials)."""
    rng = random.Random(2024)
    indicator_ids = [f"ind_{k}" for k in range(8)]
    for _ in range(1000):
        model = _random_model(rng, indicator_ids)
        present = rng.sample(indicator_ids, rng.randint(0, 5))
        indicators = [_indicator(i, rng.random()) for i in present]
        typology = rng.choice(TYPOLOGIES)
        weights = model["typologies"][typology]["weights"]
        candidates = [i for i in indicator_ids if i not in present and weights.get(i, 0) > 0]
        if not candidates:
            continue
        extra = rng.choice(candidates)
        before = {s.typology: s.probability for s in score_typologies(indicators, model)}
        after = {
            s.typology: s.probability
            for s in score_typologies(indicators + [_indicator(extra, rng.random() or 1.0)], model)
        }
        assert after[typology] >= before[typology] - 1e-15


def test_permutation_invariance_property():
    rng = random.Random(77)
    indicator_ids = [f"ind_{k}" for k in range(8)]
    for _ in range(1000):
        model = _random_model(rng, indicator_ids)
        indicators = [_indicator(i, rng.random()) for i in
                      rng.sample(indicator_ids, rng.randint(1, 8))]
        base = score_typologies(indicators, model)
        shuffled = indicators[:]
        rng.shuffle(shuffled)
        assert score_typologies(shuffled, model) == base


def test_rank_consistency_stable_tiebreak():
    model = {
        "version": "tie",
        "indicator_ids": ["a"],
        "typologies": {t: {"bias": -1.0, "weights": {"a": 1.0}} for t in TYPOLOGIES},
    }
    scores = score_typologies([_indicator("a")], model)
    assert [s.typology for s in scores] == list(TYPOLOGIES)
