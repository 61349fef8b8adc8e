"""Tests for pseudonym generation, history rewriting and de-masking."""

import random
import re

import pytest

from pii_detection.core import DetectionSpan, EntityType
from pii_detection.entity_mappings import BLOCKED_PLACEHOLDER
from pii_detection.recognizers import EMAIL_PATTERN
from session import lexicons
from session.core import PseudonymGenerationError
from session.pseudonym import (
    PseudonymMap,
    SyntheticGenerator,
    assign,
    demask,
    rewrite_history,
    salary_substitute,
)
from session.registry import SessionRegistry

def _snapshot(*entities):
    registry = SessionRegistry("test")
    spans = [DetectionSpan(t, 0, len(v), v) for t, v in entities]
    registry.record(0, spans)
    return registry.snapshot()

def test_assign_is_idempotent():
    pmap = PseudonymMap(seed=1)
    first = assign(pmap, "Maria Lopez", EntityType.PERSON)
    assert assign(pmap, "Maria Lopez", EntityType.PERSON) == first
    assert assign(pmap, " Maria   Lopez ", EntityType.PERSON) == first
    assert len(pmap) == 1

def test_distinct_values_get_distinct_pseudonyms():
    pmap = PseudonymMap(seed=1)
    a = pmap.assign("Maria Lopez", EntityType.PERSON)
    b = pmap.assign("James Carter", EntityType.PERSON)
    assert a != b
    assert pmap.real_for(a) == "Maria Lopez"
    assert pmap.real_for(b) == "James Carter"

def test_city_pseudonym():
    pmap = PseudonymMap(seed=5)
    city = pmap.assign("Boston", EntityType.LOCATION)
    assert city in lexicons.CITIES
    assert city != "Boston"

def test_street_address_pseudonym_keeps_shape():
    synthetic = PseudonymMap(seed=5).assign("42 Maple Street", EntityType.LOCATION)
    assert re.fullmatch(r"\d+ [A-Z][a-z]+ [A-Z][a-z]+", synthetic)

def test_person_pseudonym_shape():
    pmap = PseudonymMap(seed=3)
    for name in ["Maria Lopez", "Priya Raman", "Wei Chen"]:
        synthetic = pmap.assign(name, EntityType.PERSON)
        assert re.fullmatch(r"[A-Z][a-z]+ [A-Z][a-z]+", synthetic)

def test_email_pseudonym_is_a_valid_email():
    pmap = PseudonymMap(seed=3)
    synthetic = pmap.assign("maria.lopez@example.com", EntityType.EMAIL)
    assert re.fullmatch(EMAIL_PATTERN, synthetic)
    assert synthetic != "maria.lopez@example.com"

def test_age_pseudonym():
    synthetic = PseudonymMap(seed=9).assign("34 years old", EntityType.AGE)
    match = re.fullmatch(r"(\d+) years old", synthetic)
    assert match
    assert 1 <= int(match.group(1)) <= 120
    assert int(match.group(1)) != 34

def test_date_of_birth_pseudonym_shifts_year():
    synthetic = PseudonymMap(seed=9).assign("March 14, 1985", EntityType.DATE_OF_BIRTH)
    year = int(synthetic[-4:])
    assert 1982 <= year <= 1988
    assert year != 1985

def test_ip_pseudonym():
    synthetic = PseudonymMap(seed=2).assign("192.168.1.10", EntityType.IP_ADDRESS)
    assert synthetic.startswith("10.")

def test_thousand_assignments_stay_bijective():
    pmap = PseudonymMap(seed=123)
    for i in range(500):
        pmap.assign(f"Client Number{i:04d}", EntityType.PERSON)
        pmap.assign(f"client{i:04d}@corp.test", EntityType.EMAIL)
    assert len(pmap) == 1000
    assert len(set(pmap.forward.values())) == 1000
    for real, synthetic in pmap.forward.items():
        assert pmap.reverse[synthetic] == real
        assert synthetic != real

def test_same_seed_gives_same_pseudonyms():
    values = [("Maria Lopez", EntityType.PERSON), ("Boston", EntityType.LOCATION),
              ("$120,000", EntityType.SALARY), ("maria@example.com", EntityType.EMAIL)]
    a, b = PseudonymMap(seed=42), PseudonymMap(seed=42)
    assert [a.assign(v, t) for v, t in values] == [b.assign(v, t) for v, t in values]

def test_generation_gives_up_after_bounded_attempts():
    class FixedGenerator(SyntheticGenerator):
        def generate(self, value, entity_type):
            return "Alden Ashdown"

    pmap = PseudonymMap(generator=FixedGenerator())
    pmap.assign("Maria Lopez", EntityType.PERSON)
    with pytest.raises(PseudonymGenerationError):
        pmap.assign("James Carter", EntityType.PERSON)
    assert len(pmap) == 1

def test_empty_value_rejected():
    with pytest.raises(ValueError):
        PseudonymMap().assign("   ", EntityType.PERSON)

def test_rewrite_replaces_every_occurrence():
    pmap = PseudonymMap(seed=4)
    snapshot = _snapshot((EntityType.PERSON, "Jane Doe"))
    [text] = rewrite_history(["Jane Doe wrote to Jane Doe."], snapshot, pmap)
    synthetic = pmap.synthetic_for("Jane Doe")
    assert text == f"{synthetic} wrote to {synthetic}."

def test_rewrite_prefers_longest_value():
    pmap = PseudonymMap(seed=4)
    snapshot = _snapshot((EntityType.PERSON, "Ann"), (EntityType.PERSON, "Ann Lee"))
    [text] = rewrite_history(["Ann Lee, or just Ann."], snapshot, pmap)
    assert text == f"{pmap.synthetic_for('Ann Lee')}, or just {pmap.synthetic_for('Ann')}."

def test_rewrite_matches_gazetteer_values_in_any_case():
    pmap = PseudonymMap(seed=4)
    snapshot = _snapshot((EntityType.LOCATION, "Boston"))
    [text] = rewrite_history(["I moved to boston.\nBOSTON is cold."], snapshot, pmap)
    city = pmap.synthetic_for("Boston")
    assert text == f"I moved to {city}.\n{city} is cold."

def test_rewrite_tolerates_whitespace_runs():
    pmap = PseudonymMap(seed=4)
    snapshot = _snapshot((EntityType.PERSON, "Maria Lopez"))
    [text] = rewrite_history(["Maria\n  Lopez here"], snapshot, pmap)
    assert text == f"{pmap.synthetic_for('Maria Lopez')} here"

def test_rewrite_blocks_hard_blocked_values():
    pmap = PseudonymMap(seed=4)
    snapshot = _snapshot((EntityType.SSN, "123-45-6789"), (EntityType.PERSON, "Maria Lopez"))
    [text] = rewrite_history(["Maria Lopez, SSN 123-45-6789"], snapshot, pmap)
    assert text == f"{pmap.synthetic_for('Maria Lopez')}, SSN {BLOCKED_PLACEHOLDER}"
    assert "123-45-6789" not in pmap

def test_rewrite_without_values_is_identity():
    history = ["Hello there.", "", "Nothing to see."]
    assert rewrite_history(history, _snapshot(), PseudonymMap()) == history

def test_rewrite_leaves_no_real_value():
    values = [
        (EntityType.PERSON, "Maria Lopez"),
        (EntityType.LOCATION, "Boston"),
        (EntityType.DATE_OF_BIRTH, "March 14, 1985"),
        (EntityType.MEDICAL_CONDITION, "type 2 diabetes"),
        (EntityType.EMAIL, "maria.lopez@example.com"),
        (EntityType.SALARY, "$120,000"),
    ]
    history = [
        "Hi, I'm Maria Lopez.",
        "I live in Boston and was born March 14, 1985.",
        "I have type 2 diabetes. Write to maria.lopez@example.com.",
        "maria lopez from BOSTON earns $120,000.",
    ]
    pmap = PseudonymMap(seed=8)
    rewritten = rewrite_history(history, _snapshot(*values), pmap)
    for text in rewritten:
        for _, value in values:
            assert value.lower() not in text.lower()

def test_demask_restores_real_values():
    pmap = PseudonymMap(seed=6)
    person = pmap.assign("Maria Lopez", EntityType.PERSON)
    city = pmap.assign("Boston", EntityType.LOCATION)
    response = f"Hello {person}! How is the weather in {city}? {person.upper()} should pack a coat."
    assert demask(response, pmap) == "Hello Maria Lopez! How is the weather in Boston? Maria Lopez should pack a coat."

def test_demask_with_empty_map_is_identity():
    assert demask("Nothing mapped here.", PseudonymMap()) == "Nothing mapped here."

def test_rewrite_then_demask_round_trips():
    values = [
        (EntityType.PERSON, "Daniel Okafor"),
        (EntityType.LOCATION, "Chicago"),
        (EntityType.SALARY, "$95,000"),
        (EntityType.AGE, "34 years old"),
        (EntityType.EMAIL, "daniel.okafor@example.com"),
        (EntityType.ETHNICITY, "Latino"),
    ]
    history = [
        "I'm Daniel Okafor, 34 years old, based in Chicago.",
        "The offer is $95,000; reply to daniel.okafor@example.com.",
        "As a Latino candidate in Chicago, what should Daniel Okafor ask?",
    ]
    for seed in range(20):
        pmap = PseudonymMap(seed=seed)
        rewritten = rewrite_history(history, _snapshot(*values), pmap)
        joined = " ".join(history).lower()
        if any(s.lower() in joined for s in pmap.reverse):
            continue
        assert [demask(text, pmap) for text in rewritten] == history

def test_salary_substitute_stays_in_band():
    rng = random.Random(0)
    for _ in range(1000):
        value = float(salary_substitute("100000", rng))
        assert 70000 <= value <= 130000
        assert value != 100000

def test_salary_substitute_small_amount():
    rng = random.Random(0)
    for _ in range(100):
        synthetic = salary_substitute("1", rng)
        assert re.fullmatch(r"\d\.\d", synthetic)
        assert 0.7 <= float(synthetic) <= 1.3
        assert synthetic != "1.0"

def test_salary_substitute_keeps_format():
    rng = random.Random(1)
    for _ in range(50):
        grouped = salary_substitute("$120,000", rng)
        assert re.fullmatch(r"\$\d{2,3},\d{3}", grouped)
        assert 84000 <= int(grouped[1:].replace(",", "")) <= 156000
        short = salary_substitute("$85k", rng)
        assert re.fullmatch(r"\$\d{2,3}k", short)
        assert 60 <= int(short[1:-1]) <= 110
        cents = salary_substitute("£60,000.00", rng)
        assert re.fullmatch(r"£\d{2},\d{3}\.\d{2}", cents)

def test_salary_substitute_without_amount():
    synthetic = salary_substitute("lots", random.Random(0))
    assert synthetic.startswith("lots ")
    assert synthetic != "lots"

def test_audit_export_is_redacted():
    pmap = PseudonymMap(seed=2)
    synthetic = pmap.assign("Maria Lopez", EntityType.PERSON)
    exported = pmap.audit_export()
    assert exported == {"pairs": [{"type": "PERSON", "real_redacted": "M***(11)", "synthetic": synthetic}]}

def test_clear_destroys_mappings():
    pmap = PseudonymMap(seed=2)
    pmap.assign("Maria Lopez", EntityType.PERSON)
    pmap.clear()
    assert len(pmap) == 0
    assert "Maria Lopez" not in pmap
    assert pmap.entity_type_of("Maria Lopez") is None
