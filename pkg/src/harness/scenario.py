import os
import glob
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import yaml

from pii_detection.core import EntityType, UnknownEntityTypeError, normalize_value
from pii_detection.extractor import RecognizerSet, detect

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO_DIR = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "scenarios"
)

class HarnessError(Exception):
    """Base exception for scenario replay errors."""
    pass

class ScenarioValidationError(HarnessError):
    """Raised when a scenario fixture is malformed or its annotations do not resolve."""
    pass

class SweepConsistencyError(HarnessError):
    """Raised when a trigger turn decreases as the threshold grows."""
    pass

@dataclass(frozen=True)
class Annotation:
    """Expected entity in a fixture turn."""
    entity_type: EntityType
    surface: str

@dataclass
class ScenarioTurn:
    text: str
    entities: List[Annotation] = field(default_factory=list)

@dataclass
class ScenarioSpec:
    """A replayable multi-turn conversation."""
    id: str
    domain: str
    turns: List[ScenarioTurn]
    expected_triggers: Dict[float, Optional[int]] = field(default_factory=dict)
    source_path: Optional[str] = None

    @property
    def disclosed_types(self) -> List[EntityType]:
        """Distinct annotated types, in order of first disclosure."""
        seen: List[EntityType] = []
        for turn in self.turns:
            for annotation in turn.entities:
                if annotation.entity_type not in seen:
                    seen.append(annotation.entity_type)
        return seen

    def __len__(self) -> int:
        return len(self.turns)

class ScenarioParser:
    """Parser for scenario fixture documents."""

    def __init__(self, content: str, source_path: Optional[str] = None):
        self.content = content
        self.source_path = source_path
        self.document = self._parse_document()

    def _parse_document(self) -> Dict[str, Any]:
        try:
            document = yaml.safe_load(self.content)
        except yaml.YAMLError as e:
            raise ScenarioValidationError(f"Error parsing scenario {self.source_path or '<string>'}: {str(e)}")
        if not isinstance(document, dict):
            raise ScenarioValidationError("Scenario document must be a mapping")
        return document

    def _parse_turn(self, index: int, raw: Any) -> ScenarioTurn:
        if not isinstance(raw, dict) or not isinstance(raw.get("text"), str):
            raise ScenarioValidationError(f"Turn {index + 1} must be a mapping with a 'text' string")
        annotations = []
        for entity in raw.get("entities") or []:
            try:
                entity_type = EntityType.parse(str(entity["type"]))
                surface = str(entity["surface"])
            except (KeyError, TypeError) as e:
                raise ScenarioValidationError(f"Turn {index + 1}: malformed entity annotation ({str(e)})")
            except UnknownEntityTypeError as e:
                raise ScenarioValidationError(f"Turn {index + 1}: {str(e)}")
            annotations.append(Annotation(entity_type, surface))
        return ScenarioTurn(raw["text"], annotations)

    def get_spec(self) -> ScenarioSpec:
        doc = self.document
        if not doc.get("id"):
            raise ScenarioValidationError("Scenario is missing an 'id'")
        turns = [self._parse_turn(i, t) for i, t in enumerate(doc.get("turns") or [])]
        triggers = {}
        for tau, turn in (doc.get("expected_triggers") or {}).items():
            triggers[float(tau)] = None if turn is None else int(turn)
        spec = ScenarioSpec(
            id=str(doc["id"]),
            domain=str(doc.get("domain", "")),
            turns=turns,
            expected_triggers=triggers,
            source_path=self.source_path,
        )
        validate(spec)
        return spec

def validate(spec: ScenarioSpec) -> None:
    """Check the structural invariants: at least one turn, every annotation present in its text."""
    if not spec.turns:
        raise ScenarioValidationError(f"Scenario {spec.id} has no turns")
    for index, turn in enumerate(spec.turns):
        for annotation in turn.entities:
            if annotation.surface not in turn.text:
                raise ScenarioValidationError(
                    f"Scenario {spec.id} turn {index + 1}: annotated {annotation.entity_type.value} "
                    f"surface not found in text"
                )

def check_annotations(spec: ScenarioSpec, recognizers: RecognizerSet) -> List[str]:
    """Compare extractor output with the fixture annotations; return one message per mismatch."""
    problems = []
    for index, turn in enumerate(spec.turns):
        found = {(s.entity_type, normalize_value(s.text)) for s in detect(turn.text, recognizers, index)}
        expected = {(a.entity_type, normalize_value(a.surface)) for a in turn.entities}
        for entity_type, _ in sorted(expected - found, key=lambda x: x[0].value):
            problems.append(f"{spec.id} turn {index + 1}: missed {entity_type.value}")
        for entity_type, _ in sorted(found - expected, key=lambda x: x[0].value):
            problems.append(f"{spec.id} turn {index + 1}: unexpected {entity_type.value}")
    return problems

def load_scenario(path: str) -> ScenarioSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            content = f.read()
    except OSError as e:
        raise ScenarioValidationError(f"Error reading scenario {path}: {str(e)}")
    return ScenarioParser(content, path).get_spec()

def bundled_scenarios(scenario_dir: Optional[str] = None) -> List[ScenarioSpec]:
    """Every *.yaml fixture in the scenario directory, sorted by file name."""
    scenario_dir = scenario_dir or DEFAULT_SCENARIO_DIR
    paths = sorted(glob.glob(os.path.join(scenario_dir, "*.yaml")))
    if not paths:
        logger.warning(f"No scenario fixtures found in {scenario_dir}")
    return [load_scenario(p) for p in paths]
