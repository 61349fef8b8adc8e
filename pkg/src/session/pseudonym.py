"""
Consistent synthetic substitutes for real PII values.

A PseudonymMap owns a bijective real <-> synthetic table for one session.
Values are generated from the bundled lexicons with one seeded random stream
per entity type, so identical seeds and assignment sequences give identical
pseudonyms. The table is never serialized outbound; `audit_export` redacts
the real side.
"""

import logging
import math
import random
import re
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

from pii_detection.core import EntityType, normalize_value
from pii_detection.entity_mappings import BLOCKED_PLACEHOLDER, GAZETTEER_TYPES
from . import lexicons
from .core import PseudonymGenerationError, redact_value
from .registry import RegistrySnapshot

logger = logging.getLogger(__name__)

MAX_GENERATION_ATTEMPTS = 64

SALARY_LOW = 0.7
SALARY_HIGH = 1.3

_MONTH_NAME_PATTERN = re.compile(
    r"\b(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?"
    r"|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\b",
    re.IGNORECASE,
)

Seed = Union[int, str]

def _generic_numeric(value: str, rng: random.Random) -> str:
    """Replace every digit, keeping separators, letters and a non-zero leading digit."""
    first = True

    def swap(match):
        nonlocal first
        digit = str(rng.randint(1, 9)) if first and match.group(0) != "0" else str(rng.randint(0, 9))
        first = False
        return digit

    if not re.search(r"\d", value):
        return f"{value} {rng.randint(100, 999)}"
    return re.sub(r"\d", swap, value)

def salary_substitute(real_amount: str, rng: Optional[random.Random] = None) -> str:
    """Amount drawn uniformly from [0.7x, 1.3x] of the real one, never equal to it.

    The draw is on a grid of three significant digits of the real amount; when
    that grid has no alternative value (small amounts) it is refined by tenths.
    Currency symbols, thousands separators and a trailing 'k' are kept.
    """
    rng = rng or random.Random()
    match = re.search(r"\d[\d,]*(?:\.\d+)?", real_amount)
    if not match:
        return _generic_numeric(real_amount, rng)
    number = match.group(0)
    amount = float(number.replace(",", ""))
    if amount <= 0:
        return _generic_numeric(real_amount, rng)

    prefix, suffix = real_amount[:match.start()], real_amount[match.end():]
    grouped = "," in number
    decimals = len(number.split(".", 1)[1]) if "." in number else 0

    places = len(str(int(amount)))
    exponent = max(0, places - 3)
    for _ in range(6):
        step = 10.0 ** exponent
        digits = max(decimals, -exponent if exponent < 0 else 0)
        low = math.ceil(SALARY_LOW * amount / step - 1e-9)
        high = math.floor(SALARY_HIGH * amount / step + 1e-9)
        real = round(amount, digits)
        candidates = [k for k in range(low, high + 1) if round(k * step, digits) != real and k > 0]
        if candidates:
            value = round(rng.choice(candidates) * step, digits)
            text = f"{value:,.{digits}f}" if grouped else f"{value:.{digits}f}"
            return f"{prefix}{text}{suffix}"
        exponent -= 1
    return _generic_numeric(real_amount, rng)

def _person(value: str, rng: random.Random) -> str:
    return f"{rng.choice(lexicons.GIVEN_NAMES)} {rng.choice(lexicons.SURNAMES)}"

def _email(value: str, rng: random.Random) -> str:
    given = rng.choice(lexicons.GIVEN_NAMES).lower()
    surname = rng.choice(lexicons.SURNAMES).lower()
    return f"{given}.{surname}{rng.randint(1, 99)}@{rng.choice(lexicons.EMAIL_DOMAINS)}"

def _location(value: str, rng: random.Random) -> str:
    if re.search(r"\d", value):
        return (f"{rng.randint(10, 9899)} {rng.choice(lexicons.STREET_NAMES)} "
                f"{rng.choice(lexicons.STREET_SUFFIXES)}")
    return rng.choice(lexicons.CITIES)

def _organization(value: str, rng: random.Random) -> str:
    return f"{rng.choice(lexicons.ORGANIZATION_STEMS)} {rng.choice(lexicons.ORGANIZATION_SUFFIXES)}"

def _medical_condition(value: str, rng: random.Random) -> str:
    return rng.choice(lexicons.MEDICAL_CONDITIONS)

def _ethnicity(value: str, rng: random.Random) -> str:
    return rng.choice(lexicons.ETHNICITIES)

def _age(value: str, rng: random.Random) -> str:
    match = re.search(r"\d{1,3}", value)
    if not match:
        return _generic_numeric(value, rng)
    real = int(match.group(0))
    jitter = rng.choice([d for d in range(-6, 7) if d != 0])
    age = min(120, max(1, real + jitter))
    if age == real:
        age = real - jitter if 1 <= real - jitter <= 120 else real + 1
    return value[:match.start()] + str(age) + value[match.end():]

def _date_of_birth(value: str, rng: random.Random) -> str:
    def shift(match):
        run = match.group(0)
        if len(run) == 4:
            return str(int(run) + rng.choice([-3, -2, -1, 1, 2, 3]))
        number = str(rng.randint(1, 12))
        return number.zfill(len(run)) if run.startswith("0") else number

    def rename(match):
        name = rng.choice(lexicons.MONTH_NAMES)
        return name if len(match.group(0)) > 3 else name[:3]

    return _MONTH_NAME_PATTERN.sub(rename, re.sub(r"\d+", shift, value))

def _ip_address(value: str, rng: random.Random) -> str:
    return f"10.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}"

def _salary(value: str, rng: random.Random) -> str:
    return salary_substitute(value, rng)

GENERATION_STRATEGIES: Dict[EntityType, Callable[[str, random.Random], str]] = {
    EntityType.PERSON: _person,
    EntityType.EMAIL: _email,
    EntityType.LOCATION: _location,
    EntityType.ORGANIZATION: _organization,
    EntityType.MEDICAL_CONDITION: _medical_condition,
    EntityType.ETHNICITY: _ethnicity,
    EntityType.AGE: _age,
    EntityType.DATE_OF_BIRTH: _date_of_birth,
    EntityType.IP_ADDRESS: _ip_address,
    EntityType.SALARY: _salary,
}

class SyntheticGenerator:
    """Per-type generation strategies over one deterministic stream per entity type."""

    def __init__(self, seed: Seed = 0):
        self.seed = seed
        self._streams: Dict[EntityType, random.Random] = {}

    def _stream(self, entity_type: EntityType) -> random.Random:
        if entity_type not in self._streams:
            self._streams[entity_type] = random.Random(f"{self.seed}:{entity_type.value}")
        return self._streams[entity_type]

    def generate(self, value: str, entity_type: EntityType) -> str:
        strategy = GENERATION_STRATEGIES.get(entity_type, _generic_numeric)
        return strategy(value, self._stream(entity_type))

class PseudonymMap:
    """Bijective, stable real <-> synthetic table for one session."""

    def __init__(self, seed: Seed = 0, generator: Optional[SyntheticGenerator] = None):
        self.seed = seed
        self.generator = generator or SyntheticGenerator(seed)
        self._forward: Dict[str, str] = {}
        self._reverse: Dict[str, str] = {}
        self._types: Dict[str, EntityType] = {}

    @property
    def forward(self) -> Mapping[str, str]:
        return MappingProxyType(self._forward)

    @property
    def reverse(self) -> Mapping[str, str]:
        return MappingProxyType(self._reverse)

    def __len__(self) -> int:
        return len(self._forward)

    def __contains__(self, value: str) -> bool:
        return normalize_value(value) in self._forward

    def entity_type_of(self, value: str) -> Optional[EntityType]:
        return self._types.get(normalize_value(value))

    def synthetic_for(self, value: str) -> Optional[str]:
        return self._forward.get(normalize_value(value))

    def real_for(self, synthetic: str) -> Optional[str]:
        return self._reverse.get(synthetic)

    def _acceptable(self, value: str, candidate: str) -> bool:
        if not candidate or candidate == BLOCKED_PLACEHOLDER:
            return False
        folded = candidate.lower()
        if folded == value.lower():
            return False
        for real, synthetic in self._forward.items():
            if folded == synthetic.lower() or folded == real.lower():
                return False
            # A synthetic value must never contain or sit inside a real one
            if real.lower() in folded or folded in real.lower():
                return False
        return True

    def assign(self, value: str, entity_type: EntityType) -> str:
        """Return the pseudonym for `value`, generating and recording one if needed."""
        value = normalize_value(value)
        if not value:
            raise ValueError("Cannot assign a pseudonym to an empty value")
        existing = self._forward.get(value)
        if existing is not None:
            return existing
        for _ in range(MAX_GENERATION_ATTEMPTS):
            candidate = self.generator.generate(value, entity_type)
            if self._acceptable(value, candidate):
                self._forward[value] = candidate
                self._reverse[candidate] = value
                self._types[value] = entity_type
                logger.debug(f"Assigned pseudonym for {entity_type.value} {redact_value(value)}")
                return candidate
        raise PseudonymGenerationError(
            f"No unused {entity_type.value} pseudonym for {redact_value(value)} "
            f"after {MAX_GENERATION_ATTEMPTS} attempts"
        )

    def clear(self) -> None:
        """Destroy every mapping; used when the owning session ends."""
        self._forward.clear()
        self._reverse.clear()
        self._types.clear()

    def audit_export(self) -> Dict[str, List[Dict[str, str]]]:
        """Local debugging view; the real side is redacted."""
        return {
            "pairs": [
                {
                    "type": self._types[real].value,
                    "real_redacted": redact_value(real),
                    "synthetic": synthetic,
                }
                for real, synthetic in self._forward.items()
            ]
        }

class _Substitution:
    """Single-pass, longest-first replacement of a fixed set of phrases.

    Whitespace inside a phrase matches any whitespace run. Phrases flagged as
    case-insensitive also match in any casing, but only on word boundaries.
    """

    def __init__(self, replacements: Mapping[str, str], case_insensitive: Sequence[str] = ()):
        self._exact = dict(replacements)
        self._folded = {phrase.lower(): self._exact[phrase] for phrase in case_insensitive if phrase in self._exact}
        self.pattern = None
        if not self._exact:
            return
        alternatives = []
        for phrase in sorted(self._exact, key=lambda p: (-len(p), p)):
            body = r"\s+".join(re.escape(part) for part in phrase.split())
            if phrase.lower() in self._folded:
                alternatives.append(rf"(?:{body}|(?<!\w)(?i:{body})(?!\w))")
            else:
                alternatives.append(body)
        self.pattern = re.compile("|".join(alternatives))

    def _lookup(self, match) -> str:
        key = normalize_value(match.group(0))
        if key in self._exact:
            return self._exact[key]
        return self._folded.get(key.lower(), match.group(0))

    def apply(self, text: str) -> str:
        if self.pattern is None or not text:
            return text
        return self.pattern.sub(self._lookup, text)

def assign(pmap: PseudonymMap, value: str, entity_type: EntityType) -> str:
    return pmap.assign(value, entity_type)

def rewrite_history(history: Sequence[str], snapshot: RegistrySnapshot, pmap: PseudonymMap) -> List[str]:
    """Replace every registered real value in every text.

    Non-blocked values become their pseudonyms (assigned on demand); hard-blocked
    values become the blocked placeholder.
    """
    replacements: Dict[str, str] = {}
    case_insensitive: List[str] = []
    for entity in snapshot.values(include_blocked=False):
        replacements[entity.value] = pmap.assign(entity.value, entity.entity_type)
        if entity.entity_type in GAZETTEER_TYPES:
            case_insensitive.append(entity.value)
    for entity in snapshot.values():
        if entity.blocked:
            replacements[entity.value] = BLOCKED_PLACEHOLDER
    substitution = _Substitution(replacements, case_insensitive)
    return [substitution.apply(text) for text in history]

def block_registered(history: Sequence[str], snapshot: RegistrySnapshot) -> List[str]:
    """Replace every registered hard-blocked value in every text, wherever it appears."""
    blocked = {e.value: BLOCKED_PLACEHOLDER for e in snapshot.values() if e.blocked}
    substitution = _Substitution(blocked)
    return [substitution.apply(text) for text in history]

def demask(response: str, pmap: PseudonymMap) -> str:
    """Restore real values for every synthetic value in the response."""
    case_insensitive = [s for s, real in pmap.reverse.items() if pmap.entity_type_of(real) in GAZETTEER_TYPES]
    return _Substitution(pmap.reverse, case_insensitive).apply(response)
