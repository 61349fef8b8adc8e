"""
Entity type sensitivity weights and hard-block classification.
Direct identifiers carry higher weight than quasi-identifiers.
"""

import logging
from types import MappingProxyType
from typing import Dict, FrozenSet, Mapping, Optional, Union

import yaml

from .core import EntityType, ConfigurationError, UnknownEntityTypeError

logger = logging.getLogger(__name__)

# Base sensitivity weight w(e) per entity type
DEFAULT_WEIGHTS: Dict[EntityType, float] = {
    EntityType.SSN: 1.00,
    EntityType.CREDIT_CARD: 1.00,
    EntityType.DATE_OF_BIRTH: 0.90,
    EntityType.MEDICAL_CONDITION: 0.85,
    EntityType.EMAIL: 0.80,
    EntityType.PHONE: 0.75,
    EntityType.PERSON: 0.60,
    EntityType.SALARY: 0.60,
    EntityType.LOCATION: 0.50,
    EntityType.IP_ADDRESS: 0.50,
    EntityType.ORGANIZATION: 0.30,

    # Quasi-identifier tier
    EntityType.AGE: 0.50,
    EntityType.ETHNICITY: 0.50,

    # Direct-identifier tier; only scored when hard-blocked types are included
    EntityType.BANK_ACCOUNT: 1.00,
    EntityType.IBAN: 1.00,
}

# Never forwarded upstream, whatever the score or mode
HARD_BLOCKED_TYPES: FrozenSet[EntityType] = frozenset({
    EntityType.SSN,
    EntityType.CREDIT_CARD,
    EntityType.BANK_ACCOUNT,
    EntityType.IBAN,
})

BLOCKED_PLACEHOLDER = "[BLOCKED]"

# Types detected from gazetteers rather than structural patterns
GAZETTEER_TYPES: FrozenSet[EntityType] = frozenset({
    EntityType.PERSON,
    EntityType.LOCATION,
    EntityType.ORGANIZATION,
    EntityType.MEDICAL_CONDITION,
    EntityType.ETHNICITY,
})

def is_hard_blocked(entity_type: EntityType) -> bool:
    """Check if an entity type must be replaced with the blocked placeholder."""
    return entity_type in HARD_BLOCKED_TYPES

def _validate_weight(entity_type: EntityType, value) -> float:
    try:
        weight = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Weight for {entity_type.value} is not a number: {value!r}")
    if not 0.0 < weight <= 1.0:
        raise ConfigurationError(f"Weight for {entity_type.value} must be in (0, 1], got {weight}")
    return weight

class SensitivityWeights:
    """Immutable mapping EntityType -> w(e), total over the enumeration."""

    def __init__(self, overrides: Optional[Mapping[Union[EntityType, str], float]] = None):
        table = dict(DEFAULT_WEIGHTS)
        for key, value in (overrides or {}).items():
            try:
                entity_type = key if isinstance(key, EntityType) else EntityType.parse(str(key))
            except UnknownEntityTypeError as e:
                raise ConfigurationError(str(e))
            table[entity_type] = _validate_weight(entity_type, value)
        self._table = MappingProxyType(table)

    @classmethod
    def from_file(cls, path: str) -> "SensitivityWeights":
        """Load a flat YAML mapping of entity-type name to weight over the defaults."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"Error reading weight file {path}: {str(e)}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Weight file {path} must contain a flat mapping")
        logger.info(f"Loaded {len(data)} weight overrides from {path}")
        return cls(data)

    def weight(self, entity_type: EntityType) -> float:
        return self._table[entity_type]

    def as_dict(self) -> Dict[str, float]:
        return {t.value: w for t, w in self._table.items()}

    def __getitem__(self, entity_type: EntityType) -> float:
        return self._table[entity_type]

    def __eq__(self, other) -> bool:
        return isinstance(other, SensitivityWeights) and dict(self._table) == dict(other._table)

    def __repr__(self) -> str:
        return f"SensitivityWeights({self.as_dict()})"

DEFAULT_SENSITIVITY = SensitivityWeights()

def weight(entity_type: EntityType, table: SensitivityWeights = DEFAULT_SENSITIVITY) -> float:
    """Get the configured base weight for an entity type."""
    return table.weight(entity_type)
