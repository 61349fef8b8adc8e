import re
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import List

logger = logging.getLogger(__name__)

class EntityType(str, Enum):
    """Closed set of PII categories tracked by the middleware."""
    PERSON = "PERSON"
    LOCATION = "LOCATION"
    ORGANIZATION = "ORGANIZATION"
    EMAIL = "EMAIL"
    PHONE = "PHONE"
    DATE_OF_BIRTH = "DATE_OF_BIRTH"
    SSN = "SSN"
    MEDICAL_CONDITION = "MEDICAL_CONDITION"
    SALARY = "SALARY"
    CREDIT_CARD = "CREDIT_CARD"
    IP_ADDRESS = "IP_ADDRESS"
    BANK_ACCOUNT = "BANK_ACCOUNT"
    IBAN = "IBAN"
    AGE = "AGE"
    ETHNICITY = "ETHNICITY"

    @classmethod
    def parse(cls, name: str) -> "EntityType":
        """Look up a type by name, case-insensitively."""
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise UnknownEntityTypeError(f"Unknown entity type: {name!r}")

_WHITESPACE = re.compile(r"\s+")

def normalize_value(surface: str) -> str:
    """Canonical form of a detected value: trimmed, inner whitespace collapsed, case kept."""
    return _WHITESPACE.sub(" ", surface.strip())

@dataclass(frozen=True)
class DetectionSpan:
    """A single PII occurrence inside one message."""
    entity_type: EntityType
    start: int
    end: int
    text: str
    turn: int = 0

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"Span start {self.start} must be before end {self.end}")

    def overlaps(self, other: "DetectionSpan") -> bool:
        return self.start < other.end and other.start < self.end

    @property
    def length(self) -> int:
        return self.end - self.start

@dataclass
class SessionEntity:
    """A canonical value accumulated in the session registry."""
    entity_type: EntityType
    value: str
    first_seen_turn: int
    spans: List[DetectionSpan] = field(default_factory=list)
    blocked: bool = False

    @property
    def occurrence_count(self) -> int:
        return len(self.spans)

class Recognizer(ABC):
    """Detects one entity type in raw text."""

    def __init__(self, name: str, entity_type: EntityType):
        self.name = name
        self.entity_type = entity_type

    @abstractmethod
    def find(self, text: str) -> List[DetectionSpan]:
        """Return every candidate span of this recognizer's type in text."""
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, {self.entity_type.value})"

class PiiDetectionError(Exception):
    """Base exception for detection and entity-model errors."""
    pass

class ConfigurationError(PiiDetectionError):
    """Raised when weights, patterns or gazetteers are invalid."""
    pass

class UnknownEntityTypeError(PiiDetectionError):
    """Raised when a name does not match any EntityType."""
    pass
