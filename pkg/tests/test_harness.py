"""Tests for scenario fixtures, replay under each protection mode, and threshold sweeps."""

import pytest

from pii_detection.core import EntityType
from harness.runner import (
    BaselineMasker,
    ProtectionMode,
    run_scenario,
    sweep,
    trigger_matrix,
)
from harness.scenario import (
    Annotation,
    ScenarioParser,
    ScenarioSpec,
    ScenarioTurn,
    ScenarioValidationError,
    SweepConsistencyError,
    check_annotations,
    load_scenario,
    validate,
)
from session.pipeline import ChatSession, process_turn
from session.risk import RiskConfig
from session.upstream import EchoUpstream, TemplatedUpstream

SCENARIO_IDS = ["S1", "S2", "S3", "S4"]

def test_bundled_fixtures(scenarios):
    assert sorted(scenarios) == SCENARIO_IDS
    assert scenarios["S1"].domain == "Healthcare"
    assert len(scenarios["S4"]) == 10

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_extractor_agrees_with_annotations(scenarios, recognizers, scenario_id):
    assert check_annotations(scenarios[scenario_id], recognizers) == []

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_trigger_turns_per_threshold(scenarios, recognizers, scenario_id):
    spec = scenarios[scenario_id]
    taus = sorted(spec.expected_triggers)
    reports = sweep(spec, taus, recognizers=recognizers)
    assert {r.tau: r.trigger_turn for r in reports} == spec.expected_triggers

def test_expected_trigger_matrix(scenarios):
    expected = {
        "S1": {1.5: 4, 2.0: 4, 2.5: 4},
        "S2": {1.5: 2, 2.0: 2, 2.5: 2},
        "S3": {1.5: 2, 2.0: 2, 2.5: 3},
        "S4": {1.5: 3, 2.0: 5, 2.5: 5},
    }
    assert {sid: spec.expected_triggers for sid, spec in scenarios.items()} == expected

def test_cpe_series_of_healthcare_scenario(scenarios, recognizers, risk_config):
    report = run_scenario(scenarios["S1"], ProtectionMode.CAMP, risk_config, recognizers=recognizers)
    assert report.cpe_series[:4] == pytest.approx([0.0, 0.6, 1.43, 3.2])
    assert len(report.cpe_series) == 8
    assert report.cpe_series == sorted(report.cpe_series)

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_camp_exposes_nothing_in_final_window(scenarios, recognizers, risk_config, scenario_id):
    report = run_scenario(scenarios[scenario_id], ProtectionMode.CAMP, risk_config, recognizers=recognizers)
    assert report.exposure_final == 0
    assert report.exposed_types == []

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_baseline_leaks_quasi_identifiers(scenarios, recognizers, risk_config, scenario_id):
    report = run_scenario(scenarios[scenario_id], ProtectionMode.PER_TURN_BASELINE, risk_config,
                          recognizers=recognizers)
    assert report.exposure_final >= 3
    assert report.trigger_turn is None
    assert "EMAIL" not in report.exposed_types
    assert "SSN" not in report.exposed_types

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_no_protection_exposes_every_disclosed_type(scenarios, recognizers, risk_config, scenario_id):
    spec = scenarios[scenario_id]
    report = run_scenario(spec, ProtectionMode.NONE, risk_config, recognizers=recognizers)
    assert report.exposure_final == len(spec.disclosed_types)
    assert report.exposure_ever == report.exposure_final

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_risk_is_measured_identically_in_every_mode(scenarios, recognizers, risk_config, scenario_id):
    series = [
        run_scenario(scenarios[scenario_id], mode, risk_config, recognizers=recognizers).cpe_series
        for mode in ProtectionMode
    ]
    assert series[0] == series[1] == series[2]

def _replay(spec, recognizers, config):
    session = ChatSession(session_id=spec.id, config=config, recognizers=recognizers, seed=0)
    client = EchoUpstream()
    for turn in spec.turns:
        process_turn(session, turn.text, client)
    return session

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_hard_blocked_values_never_leave_the_session(scenarios, recognizers, scenario_id):
    spec = scenarios[scenario_id]
    for tau in (1.5, 2.0, 2.5, 100.0):
        session = _replay(spec, recognizers, RiskConfig(tau=tau))
        blocked = [e.value for e in session.registry.entities() if e.blocked]
        for text in session.transcript.texts():
            for value in blocked:
                assert value not in text

def test_finance_scenario_reports_blocked_types(scenarios, recognizers, risk_config):
    report = run_scenario(scenarios["S3"], ProtectionMode.CAMP, risk_config, recognizers=recognizers)
    assert report.blocked_types == ["BANK_ACCOUNT", "SSN"]
    unprotected = run_scenario(scenarios["S3"], ProtectionMode.NONE, risk_config, recognizers=recognizers)
    assert unprotected.blocked_types == []

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_no_real_value_after_trigger(scenarios, recognizers, risk_config, scenario_id):
    session = _replay(scenarios[scenario_id], recognizers, risk_config)
    trigger_index = session.trace.trigger_index
    assert trigger_index is not None
    entities = session.registry.entities()
    for index, text in enumerate(session.transcript.texts()):
        if index < trigger_index:
            continue
        for entity in entities:
            if entity.first_seen_turn <= index:
                assert entity.value not in text

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_camp_replies_never_carry_pseudonyms(scenarios, recognizers, risk_config, scenario_id):
    spec = scenarios[scenario_id]
    session = ChatSession(session_id=spec.id, config=risk_config, recognizers=recognizers, seed=0)
    client = TemplatedUpstream(lambda: session.pmap.reverse)
    replies = [process_turn(session, turn.text, client) for turn in spec.turns]
    synthetic = list(session.pmap.reverse)
    real_values = {e.value for e in session.registry.entities()}
    assert synthetic
    for reply in replies:
        assert all(value not in reply for value in synthetic)
    for reply in replies[session.trace.trigger_index:]:
        assert any(value in reply for value in real_values)

@pytest.mark.parametrize("scenario_id", SCENARIO_IDS)
def test_default_mock_mentions_a_value_after_trigger(scenarios, recognizers, risk_config, scenario_id):
    report = run_scenario(scenarios[scenario_id], ProtectionMode.CAMP, risk_config, recognizers=recognizers)
    trigger_index = report.trigger_turn - 1
    assert len(report.responses) == len(scenarios[scenario_id])
    assert all(reply == "Noted." for reply in report.responses[:trigger_index])
    assert all(reply != "Noted." for reply in report.responses[trigger_index:])

def test_replay_is_deterministic(scenarios, recognizers, risk_config):
    first = run_scenario(scenarios["S2"], ProtectionMode.CAMP, risk_config, seed=5, recognizers=recognizers)
    second = run_scenario(scenarios["S2"], ProtectionMode.CAMP, risk_config, seed=5, recognizers=recognizers)
    assert first.summary_row() == second.summary_row()
    assert first.audit == second.audit
    assert first.graph_evolution == second.graph_evolution

def test_summary_row_order(scenarios, recognizers, risk_config):
    row = run_scenario(scenarios["S1"], ProtectionMode.CAMP, risk_config, recognizers=recognizers).summary_row()
    assert list(row) == ["scenario", "mode", "tau", "alpha", "trigger_turn", "exposure_final",
                         "exposure_ever", "final_cpe"]
    assert row["trigger_turn"] == 4
    assert row["final_cpe"] == pytest.approx(8.03)

def test_baseline_masker(recognizers):
    masker = BaselineMasker(recognizers)
    text = "I'm Maria Lopez, mail me at maria@example.com or call 617-555-0123."
    assert masker.mask(text) == "I'm Maria Lopez, mail me at [EMAIL] or call [PHONE]."

def test_trigger_matrix_ignores_baselines(scenarios, recognizers, risk_config):
    spec = scenarios["S2"]
    reports = [run_scenario(spec, mode, risk_config, recognizers=recognizers) for mode in ProtectionMode]
    assert trigger_matrix(reports) == {"S2": {2.0: 2}}

def test_sweep_rejects_bad_thresholds(scenarios, recognizers):
    with pytest.raises(ValueError):
        sweep(scenarios["S1"], [], recognizers=recognizers)
    with pytest.raises(ValueError):
        sweep(scenarios["S1"], [2.5, 1.5], recognizers=recognizers)

def test_sweep_detects_inconsistent_triggers(scenarios, recognizers, monkeypatch):
    import harness.runner as runner

    real_run = runner.run_scenario
    turns = iter([4, 2])

    def fake_run(*args, **kwargs):
        report = real_run(*args, **kwargs)
        report.trigger_turn = next(turns)
        return report

    monkeypatch.setattr(runner, "run_scenario", fake_run)
    with pytest.raises(SweepConsistencyError):
        sweep(scenarios["S1"], [1.5, 2.5], recognizers=recognizers)

def test_protection_mode_aliases():
    assert ProtectionMode.parse("camp") is ProtectionMode.CAMP
    assert ProtectionMode.parse("Baseline") is ProtectionMode.PER_TURN_BASELINE
    assert ProtectionMode.parse("none") is ProtectionMode.NONE
    assert ProtectionMode.parse("PER_TURN_BASELINE") is ProtectionMode.PER_TURN_BASELINE
    with pytest.raises(ValueError):
        ProtectionMode.parse("strict")

def test_scenario_without_turns_is_invalid():
    with pytest.raises(ScenarioValidationError):
        ScenarioParser("id: X\nturns: []\n").get_spec()

def test_annotation_must_appear_in_text():
    spec = ScenarioSpec("X", "test", [ScenarioTurn("Hello there", [Annotation(EntityType.PERSON, "Maria Lopez")])])
    with pytest.raises(ScenarioValidationError):
        validate(spec)

@pytest.mark.parametrize("document", [
    "- not a mapping\n",
    "turns:\n  - text: hi\n",
    "id: X\nturns:\n  - 42\n",
    "id: X\nturns:\n  - text: hi\n    entities:\n      - {type: PASSPORT, surface: hi}\n",
    "id: X\nturns:\n  - text: hi\n    entities:\n      - {type: PERSON}\n",
    "id: X\nturns: [\n",
])
def test_malformed_fixtures(document):
    with pytest.raises(ScenarioValidationError):
        ScenarioParser(document).get_spec()

def test_fixture_from_file(tmp_path):
    path = tmp_path / "mini.yaml"
    path.write_text(
        "id: MINI\n"
        "domain: Test\n"
        "expected_triggers: {2.0: null}\n"
        "turns:\n"
        "  - text: \"I live in Denver.\"\n"
        "    entities:\n"
        "      - {type: LOCATION, surface: Denver}\n",
        encoding="utf-8",
    )
    spec = load_scenario(str(path))
    assert spec.id == "MINI"
    assert spec.expected_triggers == {2.0: None}
    assert spec.disclosed_types == [EntityType.LOCATION]
    assert spec.source_path == str(path)

def test_missing_fixture_file():
    with pytest.raises(ScenarioValidationError):
        load_scenario("/nonexistent/scenario.yaml")
