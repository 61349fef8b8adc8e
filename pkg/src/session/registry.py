import logging
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from pii_detection.core import DetectionSpan, EntityType, SessionEntity, normalize_value
from pii_detection.entity_mappings import is_hard_blocked
from .core import TurnOrderError, redact_value

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class RegistrySnapshot:
    """Point-in-time copy of a session registry; later records do not alter it."""
    session_id: str
    entities: Tuple[SessionEntity, ...]
    type_set: FrozenSet[EntityType]
    type_first_seen: Mapping[EntityType, int]

    def values(self, include_blocked: bool = True) -> List[SessionEntity]:
        return [e for e in self.entities if include_blocked or not e.blocked]

    def export(self) -> Dict[str, Any]:
        """Redacted structured record safe for the inspection endpoint and reports."""
        return {
            "session_id": self.session_id,
            "entities": [
                {
                    "type": e.entity_type.value,
                    "value_redacted": redact_value(e.value),
                    "blocked": e.blocked,
                    "first_seen_turn": e.first_seen_turn,
                    "occurrence_count": e.occurrence_count,
                }
                for e in self.entities
            ],
            "type_set": sorted(t.value for t in self.type_set),
        }

class SessionRegistry:
    """Append-only record of every PII entity observed in one session.

    Entities are keyed by (entity type, canonical value); the type set only
    grows and first-seen turns never change once recorded.
    """

    def __init__(self, session_id: str):
        self.session_id = session_id
        self._entities: Dict[Tuple[EntityType, str], SessionEntity] = {}
        self._type_first_seen: Dict[EntityType, int] = {}
        self._last_turn: Optional[int] = None

    @property
    def type_set(self) -> FrozenSet[EntityType]:
        return frozenset(self._type_first_seen)

    @property
    def last_turn(self) -> Optional[int]:
        return self._last_turn

    def __len__(self) -> int:
        return len(self._entities)

    def entities(self) -> List[SessionEntity]:
        return list(self._entities.values())

    def record(self, turn: int, spans: Sequence[DetectionSpan]) -> List[EntityType]:
        """Merge the spans detected at `turn`; return the entity types new to the session."""
        if self._last_turn is not None and turn < self._last_turn:
            raise TurnOrderError(
                f"Session {self.session_id}: turn {turn} recorded after turn {self._last_turn}"
            )
        self._last_turn = turn
        new_types: List[EntityType] = []
        for span in spans:
            value = normalize_value(span.text)
            if not value:
                continue
            key = (span.entity_type, value)
            entity = self._entities.get(key)
            if entity is None:
                entity = SessionEntity(
                    entity_type=span.entity_type,
                    value=value,
                    first_seen_turn=turn,
                    blocked=is_hard_blocked(span.entity_type),
                )
                self._entities[key] = entity
            if span not in entity.spans:
                entity.spans.append(span)
            if span.entity_type not in self._type_first_seen:
                self._type_first_seen[span.entity_type] = turn
                new_types.append(span.entity_type)
        if new_types:
            logger.debug(
                f"Session {self.session_id} turn {turn}: new types {[t.value for t in new_types]}"
            )
        return new_types

    def snapshot(self) -> RegistrySnapshot:
        entities = tuple(replace(e, spans=list(e.spans)) for e in self._entities.values())
        return RegistrySnapshot(
            session_id=self.session_id,
            entities=entities,
            type_set=self.type_set,
            type_first_seen=MappingProxyType(dict(self._type_first_seen)),
        )

def record(registry: SessionRegistry, turn: int, spans: Sequence[DetectionSpan]) -> List[EntityType]:
    return registry.record(turn, spans)

def snapshot(registry: SessionRegistry) -> RegistrySnapshot:
    return registry.snapshot()
