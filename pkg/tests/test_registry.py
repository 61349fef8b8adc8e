"""Tests for the append-only session entity registry."""

import pytest

from pii_detection.core import DetectionSpan, EntityType
from session.core import TurnOrderError, redact_value
from session.registry import SessionRegistry, record, snapshot

def _span(entity_type, text, turn=0, start=0):
    return DetectionSpan(entity_type, start, start + len(text), text, turn)

def test_record_returns_new_types():
    registry = SessionRegistry("s")
    assert record(registry, 0, [_span(EntityType.PERSON, "Maria Lopez")]) == [EntityType.PERSON]
    new = record(registry, 1, [_span(EntityType.PERSON, "Ana Ruiz", 1), _span(EntityType.LOCATION, "Boston", 1, 12)])
    assert new == [EntityType.LOCATION]
    assert registry.type_set == {EntityType.PERSON, EntityType.LOCATION}
    assert len(registry) == 3

def test_same_value_is_deduplicated_and_first_seen_kept():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.LOCATION, "Boston")])
    registry.record(2, [_span(EntityType.LOCATION, "Boston", 2, 5)])
    [entity] = registry.entities()
    assert entity.first_seen_turn == 0
    assert entity.occurrence_count == 2

def test_values_are_normalized():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.PERSON, "Maria  Lopez")])
    registry.record(1, [_span(EntityType.PERSON, "Maria Lopez", 1)])
    assert [e.value for e in registry.entities()] == ["Maria Lopez"]

def test_same_value_under_two_types_is_two_entities():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.PERSON, "Paris"), _span(EntityType.LOCATION, "Paris", 0, 10)])
    assert len(registry) == 2

def test_hard_blocked_entities_are_flagged():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.SSN, "123-45-6789"), _span(EntityType.EMAIL, "a@b.example", 0, 20)])
    blocked = {e.entity_type: e.blocked for e in registry.entities()}
    assert blocked == {EntityType.SSN: True, EntityType.EMAIL: False}

def test_same_turn_may_be_recorded_twice():
    registry = SessionRegistry("s")
    registry.record(3, [])
    registry.record(3, [_span(EntityType.AGE, "age 30", 3)])
    assert registry.last_turn == 3

def test_earlier_turn_is_rejected():
    registry = SessionRegistry("s")
    registry.record(2, [])
    with pytest.raises(TurnOrderError):
        registry.record(1, [_span(EntityType.PERSON, "Maria Lopez", 1)])
    assert len(registry) == 0

def test_snapshot_is_isolated_from_later_records():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.PERSON, "Maria Lopez")])
    frozen = snapshot(registry)
    registry.record(1, [_span(EntityType.PERSON, "Maria Lopez", 1), _span(EntityType.LOCATION, "Boston", 1, 20)])
    assert frozen.type_set == {EntityType.PERSON}
    assert len(frozen.entities) == 1
    assert frozen.entities[0].occurrence_count == 1
    assert dict(frozen.type_first_seen) == {EntityType.PERSON: 0}
    with pytest.raises(TypeError):
        frozen.type_first_seen[EntityType.AGE] = 4

def test_snapshot_values_can_skip_blocked():
    registry = SessionRegistry("s")
    registry.record(0, [_span(EntityType.SSN, "123-45-6789"), _span(EntityType.PERSON, "Maria Lopez", 0, 20)])
    frozen = registry.snapshot()
    assert [e.entity_type for e in frozen.values(include_blocked=False)] == [EntityType.PERSON]
    assert len(frozen.values()) == 2

def test_export_never_carries_real_values():
    registry = SessionRegistry("abc")
    registry.record(0, [_span(EntityType.SSN, "123-45-6789"), _span(EntityType.PERSON, "Maria Lopez", 0, 20)])
    exported = registry.snapshot().export()
    assert exported["session_id"] == "abc"
    assert exported["type_set"] == ["PERSON", "SSN"]
    assert "123-45-6789" not in str(exported)
    assert "Maria Lopez" not in str(exported)
    person = next(e for e in exported["entities"] if e["type"] == "PERSON")
    assert person["value_redacted"] == "M***(11)"
    assert person["first_seen_turn"] == 0

def test_redact_value():
    assert redact_value("Boston") == "B***(6)"
    assert redact_value("") == ""
