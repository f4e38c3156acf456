from __future__ import annotations

import json
from dataclasses import replace

import pytest

from sargen.errors import BudgetExceeded, ConfigMissing, ParseFailure
from sargen.narrative import (
    SECTION_ORDER,
    ChecklistItem,
    MockAdapter,
    NarrativeDraft,
    assign_confidence,
    build_prompt,
    combine,
    generate_draft,
    parse_checklist,
    render_sar,
)
from sargen.privacy import scan_for_leaks

from .conftest import GOLDEN


@pytest.fixture()
def prompt_inputs(fixture_run):
    from sargen.pipeline.runner import _prompt_inputs

    return _prompt_inputs(fixture_run, ())


def test_prompt_golden_byte_equal(fixture_run):
    assert fixture_run.prompts[1] == (GOLDEN / "prompt_case_01.txt").read_text(encoding="utf-8")


def test_prompt_omits_empty_intel_section(prompt_inputs):
    without_intel = replace(prompt_inputs, intel=())
    prompt = build_prompt(without_intel, 60000)
    assert "# INTEL" not in prompt.text
    assert "# CASE SUMMARY" in prompt.text


def test_prompt_truncates_memory_first(prompt_inputs):
    full = build_prompt(prompt_inputs, 60000)
    assert "# MEMORY" in full.text
    # Shrink the budget until something must go: memory entries drop before
    # any intel entry does.
    budget = len(full.text) - 1
    trimmed = build_prompt(prompt_inputs, budget)
    assert len(trimmed.inputs.memory_hits) < len(prompt_inputs.memory_hits)
    assert trimmed.inputs.intel == prompt_inputs.intel
    assert trimmed.inputs.findings == prompt_inputs.findings


def test_prompt_budget_exceeded_when_mandatory_overflow(prompt_inputs):
    with pytest.raises(BudgetExceeded):
        build_prompt(replace(prompt_inputs, findings=(), intel=(), memory_hits=(), memory_scores=()), 200)


def test_generate_draft_sections_and_tokens(fixture_run):
    draft = fixture_run.draft()
    assert list(draft.sections) == list(SECTION_ORDER)
    assert all(draft.sections[s] for s in SECTION_ORDER)
    assert "[[PERSON_1]]" in draft.section_text("who")


def test_generate_draft_deterministic(fixture_run, prompt_inputs):
    prompt = build_prompt(prompt_inputs, 60000)
    a = generate_draft(prompt, MockAdapter(), fixture_run.checklist)
    b = generate_draft(prompt, MockAdapter(), fixture_run.checklist)
    assert json.dumps(a.to_doc(), sort_keys=True) == json.dumps(b.to_doc(), sort_keys=True)


def test_parse_failure_without_markers(prompt_inputs):
    class BadAdapter:
        adapter_id = "bad"
        from sargen.narrative.adapter import AdapterCapabilities

        capabilities = AdapterCapabilities(max_prompt_chars=60000, deterministic=True)

        def generate(self, prompt, params):
            return "a narrative without any section markers", {}

    prompt = build_prompt(prompt_inputs, 60000)
    with pytest.raises(ParseFailure) as excinfo:
        generate_draft(prompt, BadAdapter())
    assert excinfo.value.raw_output  # retained for audit


def test_parse_failure_on_unknown_citation(prompt_inputs):
    class HallucinatingAdapter:
        adapter_id = "bad"
        from sargen.narrative.adapter import AdapterCapabilities

        capabilities = AdapterCapabilities(max_prompt_chars=60000, deterministic=True)

        def generate(self, prompt, params):
            lines = []
            for name in SECTION_ORDER:
                lines.append(f"## SECTION {name}")
                lines.append("An invented claim. [refs: finding:made_up]")
            return "\n".join(lines), {}

    prompt = build_prompt(prompt_inputs, 60000)
    with pytest.raises(ParseFailure):
        generate_draft(prompt, HallucinatingAdapter())


def test_intro_fidelity_to_summary(fixture_run):
    draft = fixture_run.draft()
    summary = fixture_run.summary
    assert draft.intro.credit_totals == summary.credit_totals
    assert draft.intro.debit_totals == summary.debit_totals
    assert draft.intro.activity_start == summary.date_range[0]
    assert draft.intro.activity_end == summary.date_range[1]
    assert set(draft.intro.typologies) == set(fixture_run.crime_report.detected)


def test_citation_closure(fixture_run, prompt_inputs):
    known = prompt_inputs.evidence_ids()
    for refs in fixture_run.draft().cited_ids():
        assert refs in known


def test_every_sentence_cited_or_contextual(fixture_run):
    draft = fixture_run.draft()
    for section in SECTION_ORDER:
        assert len(draft.sections[section]) == len(draft.citations[section])


def test_trace_steps_reference_evidence(fixture_run):
    trace = fixture_run.draft().trace
    assert trace.steps
    for step in trace.steps:
        assert step.inputs, step.step_id
        assert 0.0 <= step.confidence.combined <= 1.0
    assert 0.0 <= trace.overall_confidence <= 1.0


# --- confidence math -------------------------------------------------------


def test_confidence_all_ones():
    score = assign_confidence(
        ["a", "b", "c"], {"a", "b", "c"}, {"a": 1.0},
        [ChecklistItem("r", "section_present", "who")],
        section="who", section_has_intel_citation=False, section_nonempty=True,
    )
    assert score.combined == 1.0


def test_confidence_zero_context_zero_combined():
    score = assign_confidence(
        ["a", "b", "c"], {"a", "b", "c"}, {},
        [], section=None, section_has_intel_citation=False, section_nonempty=True,
    )
    assert score.contextual_relevance == 0.0
    assert score.combined == 0.0


def test_confidence_cube_root_example():
    # e=1, c=0.5, r=0.8 -> (0.4)^(1/3) ~= 0.7368
    assert combine(1.0, 0.5, 0.8) == pytest.approx(0.4 ** (1 / 3))
    assert combine(1.0, 0.5, 0.8) == pytest.approx(0.7368, abs=1e-4)


def test_confidence_combined_one_only_when_all_one():
    assert combine(1.0, 1.0, 1.0) == 1.0
    assert combine(1.0, 1.0, 0.999) < 1.0
    assert combine(0.0, 1.0, 1.0) == 0.0


def test_dangling_evidence_rejected():
    from sargen.errors import DanglingEvidence

    with pytest.raises(DanglingEvidence):
        assign_confidence(["ghost"], {"real"}, {}, [], None, False, True)


def test_parse_checklist():
    class Rec:
        def __init__(self, id, content):
            self.id = id
            self.content = content

    items = parse_checklist([
        Rec("r1", "CHECK section_present who -- must identify the actor"),
        Rec("r2", "CHECK intel_reference -- cite external references"),
        Rec("r3", "free-form guidance, not a check"),
    ])
    assert items == (
        ChecklistItem("r1", "section_present", "who"),
        ChecklistItem("r2", "intel_reference", None),
    )


# --- render -----------------------------------------------------------------


def test_render_golden_byte_equal(fixture_run):
    doc = json.dumps(fixture_run.render(1).to_doc(), indent=2, sort_keys=True) + "\n"
    assert doc == (GOLDEN / "sar_case_01.json").read_text(encoding="utf-8")


def test_render_unmasks_everything(fixture_run):
    document = fixture_run.render(1)
    narrative = " ".join(document.narrative.values())
    assert "[[" not in narrative
    assert scan_for_leaks(narrative, fixture_run.vault)  # originals present by design
    assert document.subjects[0]["name"] == "John Smith"
    assert document.subjects[0]["national_id"] == "523-44-1290"


def test_render_missing_filer_config_fails_at_render(fixture_run, mock_config):
    draft = fixture_run.draft(1)
    config = json.loads(json.dumps(mock_config))
    del config["filer"]
    with pytest.raises(ConfigMissing):
        render_sar(draft, fixture_run.case, fixture_run.vault, config)


def test_draft_doc_roundtrip(fixture_run):
    draft = fixture_run.draft()
    again = NarrativeDraft.from_doc(json.loads(json.dumps(draft.to_doc(), sort_keys=True)))
    assert again.sections == draft.sections
    assert again.citations == draft.citations
    assert again.intro == draft.intro
