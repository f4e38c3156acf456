from __future__ import annotations

import json
import random

import pytest

from sargen.crimetype.model import CrimeTypeReport, TypologyScore
from sargen.errors import ConfigMissing, IllegalTransition, StaleVersion
from sargen.pipeline import (
    START,
    TRANSITIONS,
    FeedbackComment,
    FeedbackEdit,
    FeedbackItem,
    PipelineAborted,
    PipelineState,
    apply_feedback,
    plan,
    run_pipeline,
)
from sargen.pipeline.state import EVENTS
from sargen.privacy import scan_for_leaks

from .conftest import make_case, make_txn, BASE_TS


def _report(detected, case_id="case-t"):
    scores = tuple(
        TypologyScore(typology=t, probability=0.9, rank=i + 1, contributing_indicators=())
        for i, t in enumerate(detected)
    )
    return CrimeTypeReport(
        case_id=case_id, indicators=(), scores=scores, detected=tuple(detected),
        model_version="t", registry_version="t",
    )


def test_plan_money_mule_agents_with_rationale(mock_config):
    case = make_case([make_txn(1, BASE_TS, 100)])
    agent_plan = plan(_report(["money_mule"]), case, mock_config["pipeline"])
    assert {"velocity", "txn_fraud", "account_health", "text_content"} <= set(agent_plan.agents_to_spawn)
    assert agent_plan.rationale["velocity"] == "typology:money_mule"
    assert agent_plan.intel_queries_enabled


def test_plan_floor_when_nothing_detected(mock_config):
    case = make_case([])
    agent_plan = plan(_report([]), case, mock_config["pipeline"])
    assert agent_plan.agents_to_spawn == ("txn_fraud",)
    assert not agent_plan.intel_queries_enabled
    assert agent_plan.rationale["txn_fraud"] == "floor:no_typology_detected"


def test_plan_geo_agent_gated_on_geo_data(mock_config):
    from sargen.ingestion.model import GeoPoint

    no_geo = make_case([make_txn(1, BASE_TS, 100)])
    agent_plan = plan(_report(["money_mule"]), no_geo, mock_config["pipeline"])
    assert "geo_anomaly" not in agent_plan.agents_to_spawn
    with_geo = make_case([make_txn(1, BASE_TS, 100, geo=GeoPoint(1.0, 2.0))])
    agent_plan = plan(_report(["money_mule"]), with_geo, mock_config["pipeline"])
    assert "geo_anomaly" in agent_plan.agents_to_spawn
    assert agent_plan.rationale["geo_anomaly"] == "data:geo_present"


def test_plan_missing_mapping_row(mock_config):
    config = json.loads(json.dumps(mock_config["pipeline"]))
    del config["typology_agents"]["money_mule"]
    with pytest.raises(ConfigMissing):
        plan(_report(["money_mule"]), make_case([]), config)


def test_end_to_end_fixture(fixture_run):
    assert fixture_run.state.stage == "awaiting_review"
    assert fixture_run.state.draft_version == 1
    assert fixture_run.report().verdict == "pass"
    assert fixture_run.state.diagnostics == []


def test_agent_failure_isolated(mock_config, case_01_raw):
    config = json.loads(json.dumps(mock_config))
    config["agents"]["velocity"]["test_fail"] = True
    run = run_pipeline(case_01_raw, config)
    assert run.state.stage == "awaiting_review"
    assert run.report() is not None
    failures = [d for d in run.state.diagnostics if d.startswith("agent velocity failed")]
    assert len(failures) == 1
    assert not any(f.agent_id == "velocity" for f in run.findings)


def test_malformed_input_fails_at_ingested(mock_config):
    with pytest.raises(PipelineAborted) as excinfo:
        run_pipeline(b"{not json", mock_config)
    assert excinfo.value.state.stage == "failed"
    assert excinfo.value.state.failed_stage == "ingested"


def test_schema_violation_fails_at_ingested(mock_config, case_01_raw):
    doc = json.loads(case_01_raw)
    doc["subjects"] = []
    with pytest.raises(PipelineAborted) as excinfo:
        run_pipeline(json.dumps(doc).encode(), mock_config)
    assert "SchemaViolation" in excinfo.value.state.error


def test_reentrancy_byte_identical(mock_config, case_01_raw):
    run_a = run_pipeline(case_01_raw, mock_config)
    run_b = run_pipeline(case_01_raw, mock_config)
    for attr in ("draft", "report"):
        doc_a = json.dumps(getattr(run_a, attr)().to_doc(), sort_keys=True)
        doc_b = json.dumps(getattr(run_b, attr)().to_doc(), sort_keys=True)
        assert doc_a == doc_b
    assert run_a.prompts == run_b.prompts
    assert run_a.state.export_event_log() == run_b.state.export_event_log()


def test_artifact_lineage(mock_config, case_01_raw):
    run = run_pipeline(case_01_raw, mock_config)
    apply_feedback(run, FeedbackItem(draft_version=1, disposition="approve"))
    assert run.state.stage == "finalized"
    referenced = {
        artifact for entry in run.state.stage_history for artifact in entry.artifacts
    }
    assert set(run.state.artifacts.values()) <= referenced


def test_masking_discipline_all_artifacts_masked(fixture_run):
    vault = fixture_run.vault
    payloads = [fixture_run.prompts[1]]
    payloads.extend(fixture_run.adapter.calls)
    payloads.append(json.dumps(fixture_run.draft().to_doc()))
    payloads.append(json.dumps(fixture_run.report().to_doc()))
    payloads.append(json.dumps(fixture_run.intel.to_doc()))
    payloads.append(fixture_run.state.export_event_log())
    for payload in payloads:
        assert scan_for_leaks(payload, vault) == []
    # the single unmasked artifact is the investigator-facing render
    rendered = json.dumps(fixture_run.render(1).to_doc())
    assert scan_for_leaks(rendered, vault)


# --- feedback loop ---------------------------------------------------------


def _fresh_run(mock_config, case_01_raw):
    return run_pipeline(case_01_raw, mock_config)


def test_approve_clean_draft_finalizes(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    state = apply_feedback(run, FeedbackItem(draft_version=1, disposition="approve"))
    assert state.stage == "finalized"
    assert run.final_draft is not None
    assert run.report().verdict == "pass"  # gate re-ran


def test_regeneration_only_changes_targeted_section(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    apply_feedback(run, FeedbackItem(
        draft_version=1, disposition="request_regeneration",
        comments=(FeedbackComment(location="where", text="expand the where-section"),),
    ))
    assert run.state.stage == "awaiting_review"
    assert run.state.draft_version == 2
    v1, v2 = run.drafts[1], run.drafts[2]
    changed = [s for s in v1.sections if v1.sections[s] != v2.sections[s]]
    assert changed == ["where"]
    assert "expand the where-section" in v2.section_text("where")


def test_stale_version_rejected(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    apply_feedback(run, FeedbackItem(
        draft_version=1, disposition="request_regeneration",
        comments=(FeedbackComment(location="how", text="more detail"),),
    ))
    with pytest.raises(StaleVersion):
        apply_feedback(run, FeedbackItem(draft_version=1, disposition="approve"))


def test_concurrent_feedback_first_writer_wins(mock_config, case_01_raw):
    import threading

    run = _fresh_run(mock_config, case_01_raw)
    outcomes = []

    def submit():
        try:
            apply_feedback(run, FeedbackItem(
                draft_version=1, disposition="request_regeneration",
                comments=(FeedbackComment(location="why", text="expand"),),
            ))
            outcomes.append("ok")
        except StaleVersion:
            outcomes.append("stale")

    threads = [threading.Thread(target=submit) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(outcomes) == ["ok", "stale"]
    assert run.state.draft_version == 2


def test_edit_then_approve_judges_edited_text(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    state = apply_feedback(run, FeedbackItem(
        draft_version=1, disposition="approve",
        edits=(FeedbackEdit(section="why",
                            old_text=run.drafts[1].section_text("why"),
                            new_text="The activity matches money mule behavior observed by the desk."),),
    ))
    assert state.stage == "finalized"
    assert "money mule" in run.final_draft.section_text("why")


def test_approve_gate_blocks_bad_edit(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    state = apply_feedback(run, FeedbackItem(
        draft_version=1, disposition="approve",
        edits=(FeedbackEdit(section="what", old_text="",
                            new_text="Debits totaling $999,999.00 left the account."),),
    ))
    assert state.stage == "awaiting_review"  # gate refused to finalize
    assert run.final_draft is None
    assert any("approve gate blocked" in d for d in run.state.diagnostics)
    assert run.report().verdict == "block"


def test_edits_remasked_before_storage(mock_config, case_01_raw):
    run = _fresh_run(mock_config, case_01_raw)
    apply_feedback(run, FeedbackItem(
        draft_version=1, disposition="request_regeneration",
        edits=(FeedbackEdit(section="who", old_text="",
                            new_text="John Smith also maintains account ACC-1001."),),
    ))
    assert run.state.draft_version == 2
    stored = run.drafts[2].section_text("who")
    assert "John Smith" not in stored
    assert "[[PERSON_1]]" in stored
    note_texts = [n.text for n in run.feedback_notes]
    assert all(scan_for_leaks(t, run.vault) == [] for t in note_texts)


def test_regeneration_cycle_cap(mock_config, case_01_raw):
    config = json.loads(json.dumps(mock_config))
    config["pipeline"]["max_regen_cycles"] = 2
    run = run_pipeline(case_01_raw, config)
    for cycle in range(2):
        apply_feedback(run, FeedbackItem(
            draft_version=run.state.draft_version, disposition="request_regeneration",
            comments=(FeedbackComment(location="how", text=f"round {cycle}"),),
        ))
    version_before = run.state.draft_version
    state = apply_feedback(run, FeedbackItem(
        draft_version=version_before, disposition="request_regeneration",
        comments=(FeedbackComment(location="how", text="one more"),),
    ))
    assert state.stage == "awaiting_review"
    assert state.draft_version == version_before  # no new draft
    assert any("regeneration cap" in d for d in state.diagnostics)


def test_feedback_edit_unknown_section_rejected(mock_config, case_01_raw):
    from sargen.errors import ValidationFailure

    run = _fresh_run(mock_config, case_01_raw)
    with pytest.raises(ValidationFailure):
        apply_feedback(run, FeedbackItem(
            draft_version=1, disposition="approve",
            edits=(FeedbackEdit(section="prologue", old_text="", new_text="x"),),
        ))


# --- state machine ----------------------------------------------------------


def test_documented_transitions_only_fuzz():
    """Model-based fuzz: random event sequences over the state machine.
    Every accepted transition must be a documented edge; everything else
    must raise IllegalTransition without corrupting the state."""
    rng = random.Random(424242)
    from datetime import datetime, timezone

    at = datetime(2024, 1, 1, tzinfo=timezone.utc)
    for _ in range(10_000):
        state = PipelineState(case_id="fuzz")
        for _ in range(rng.randint(1, 12)):
            event = rng.choice(EVENTS)
            stage_before = state.stage
            try:
                state.apply(event, at)
            except IllegalTransition:
                assert (stage_before, event) not in TRANSITIONS
                assert state.stage == stage_before
            else:
                assert (stage_before, event) in TRANSITIONS
                assert state.stage == TRANSITIONS[(stage_before, event)]
        # history is append-only and every entry matches an applied event
        assert len(state.stage_history) == len(state.events)


def test_event_log_export_jsonl(fixture_run):
    log = fixture_run.state.export_event_log()
    lines = [json.loads(line) for line in log.strip().splitlines()]
    assert [e["seq"] for e in lines] == list(range(1, len(lines) + 1))
    assert lines[0]["from_stage"] == START
    assert lines[-1]["to_stage"] == "awaiting_review"
