"""
Pattern and gazetteer recognizers for PII detection.
Each built-in recognizer targets exactly one entity type; the registry at the
bottom of this module maps recognizer names to factories.
"""

import os
import re
import logging
from typing import Callable, Dict, Iterable, List, Optional

from .core import DetectionSpan, EntityType, Recognizer, ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_GAZETTEER_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "gazetteers")

# Number of whitespace-separated tokens a context keyword may sit away from a match
DEFAULT_CONTEXT_WINDOW = 6

def luhn_valid(number: str) -> bool:
    """Verify a digit string against the Luhn mod-10 checksum."""
    digits = [int(c) for c in number if c.isdigit()]
    if len(digits) < 2:
        return False
    total = 0
    for idx, digit in enumerate(reversed(digits)):
        if idx % 2 == 1:
            digit *= 2
            if digit > 9:
                digit -= 9
        total += digit
    return total % 10 == 0

def _compile(name: str, pattern: str, flags: int = 0) -> "re.Pattern":
    try:
        return re.compile(pattern, flags)
    except re.error as e:
        raise ConfigurationError(f"Invalid pattern for recognizer {name}: {str(e)}")

def _window_before(text: str, position: int, tokens: int) -> str:
    """Text covering the last `tokens` whitespace-separated tokens before position."""
    prefix = text[:position]
    starts = [m.start() for m in re.finditer(r"\S+", prefix)]
    if not starts:
        return ""
    return prefix[starts[max(0, len(starts) - tokens)]:]

def _window_after(text: str, position: int, tokens: int) -> str:
    """Text covering the first `tokens` whitespace-separated tokens after position."""
    suffix = text[position:]
    ends = [m.end() for m in re.finditer(r"\S+", suffix)]
    if not ends:
        return ""
    return suffix[:ends[min(tokens, len(ends)) - 1]]

class PatternRecognizer(Recognizer):
    """Regex recognizer with an optional validator and optional context keywords.

    When context keywords are given, a match is only accepted if one of the
    keywords occurs within `window` tokens before or after it.
    """

    def __init__(
        self,
        name: str,
        entity_type: EntityType,
        pattern: str,
        flags: int = 0,
        validator: Optional[Callable[[str], bool]] = None,
        context: Optional[str] = None,
        window: int = DEFAULT_CONTEXT_WINDOW,
    ):
        super().__init__(name, entity_type)
        self.pattern = _compile(name, pattern, flags)
        self.validator = validator
        self.context = _compile(name, context, re.IGNORECASE) if context else None
        self.window = window

    def _has_context(self, text: str, start: int, end: int) -> bool:
        if self.context is None:
            return True
        before = _window_before(text, start, self.window)
        after = _window_after(text, end, self.window)
        return bool(self.context.search(before) or self.context.search(after))

    def find(self, text: str) -> List[DetectionSpan]:
        spans = []
        for match in self.pattern.finditer(text):
            start, end = match.span()
            if start == end:
                continue
            surface = match.group(0)
            if self.validator and not self.validator(surface):
                continue
            if not self._has_context(text, start, end):
                continue
            spans.append(DetectionSpan(self.entity_type, start, end, surface))
        return spans

class Gazetteer:
    """Known surface phrases for one entity type."""

    def __init__(self, entity_type: EntityType, phrases: Iterable[str]):
        self.entity_type = entity_type
        cleaned = set()
        for phrase in phrases:
            if not phrase or phrase != phrase.strip():
                raise ConfigurationError(
                    f"Gazetteer phrase for {entity_type.value} is empty or padded: {phrase!r}"
                )
            cleaned.add(phrase)
        if not cleaned:
            raise ConfigurationError(f"Gazetteer for {entity_type.value} has no phrases")
        self.phrases = frozenset(cleaned)

    @classmethod
    def from_file(cls, entity_type: EntityType, path: str) -> "Gazetteer":
        """Read one phrase per line; blank lines and '#' comments are skipped."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
        except OSError as e:
            raise ConfigurationError(f"Error reading gazetteer {path}: {str(e)}")
        phrases = []
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if line:
                phrases.append(line)
        return cls(entity_type, phrases)

    def __len__(self) -> int:
        return len(self.phrases)

class GazetteerRecognizer(Recognizer):
    """Case-insensitive, word-bounded phrase matcher over a gazetteer."""

    def __init__(self, name: str, gazetteer: Gazetteer):
        super().__init__(name, gazetteer.entity_type)
        self.gazetteer = gazetteer
        # Longest phrases first so alternation prefers "type 2 diabetes" over "diabetes"
        ordered = sorted(gazetteer.phrases, key=lambda p: (-len(p), p.lower()))
        alternatives = [r"\s+".join(re.escape(part) for part in phrase.split()) for phrase in ordered]
        self.pattern = _compile(name, r"(?<!\w)(?:" + "|".join(alternatives) + r")(?!\w)", re.IGNORECASE)

    def find(self, text: str) -> List[DetectionSpan]:
        return [
            DetectionSpan(self.entity_type, m.start(), m.end(), m.group(0))
            for m in self.pattern.finditer(text)
        ]

# --- Built-in structural patterns ---

EMAIL_PATTERN = r"(?<![\w.+-])[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}(?![\w-])"

PHONE_PATTERN = r"(?<![\w+(])(?:\+?1[\s.-]?)?(?:\(\d{3}\)\s?|\d{3}[\s.-]?)\d{3}[\s.-]?\d{4}(?!\w)"

SSN_PATTERN = r"(?<![\d-])\d{3}-\d{2}-\d{4}(?![\d-])"

CREDIT_CARD_PATTERN = r"(?<![\d-])\d(?:[ -]?\d){12,18}(?![\d-])"

_OCTET = r"(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)"
IP_ADDRESS_PATTERN = r"(?<![\d.])" + _OCTET + r"(?:\." + _OCTET + r"){3}(?!\d|\.\d)"

_MONTHS = (
    r"(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?"
    r"|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)"
)
DATE_PATTERN = (
    r"\b(?:"
    r"\d{1,2}/\d{1,2}/\d{2,4}"
    r"|\d{4}-\d{2}-\d{2}"
    r"|\d{1,2}-\d{1,2}-\d{4}"
    r"|" + _MONTHS + r"\.?\s+\d{1,2}(?:st|nd|rd|th)?,?\s+\d{4}"
    r"|\d{1,2}(?:st|nd|rd|th)?\s+(?:of\s+)?" + _MONTHS + r"\.?,?\s+\d{4}"
    r")\b"
)
BIRTH_CONTEXT = r"\b(?:born|birth|birthday|birthdate|DOB|d\.o\.b)\b"

SALARY_PATTERN = (
    r"(?<![\w.,])(?:"
    r"[$€£]\s?\d{1,3}(?:,\d{3})+(?:\.\d{2})?(?:\s?[kK]\b)?"
    r"|[$€£]\s?\d+(?:\.\d+)?(?:\s?[kK]\b)?"
    r"|\d{1,3}(?:,\d{3})+(?:\.\d{2})?"
    r"|\d{4,}"
    r")(?![\d,]*\d)"
)
SALARY_CONTEXT = r"\b(?:salary|salaries|income|earn|earns|earned|earning|earnings|compensation|CTC)\b"

AGE_PATTERN = (
    r"\b(?:"
    r"aged?\s*:?\s*\d{1,3}"
    r"|\d{1,3}(?:\s+|-)years?(?:\s+|-)old"
    r"|\d{1,3}\s*(?:yo|y/o)"
    r")\b"
)

BANK_ACCOUNT_PATTERN = r"(?<![\d-])\d{8,17}(?![\d-])"
ACCOUNT_CONTEXT = r"\b(?:account|acct|a/c|checking|savings)\b"

IBAN_PATTERN = r"\b[A-Z]{2}\d{2}(?: ?[A-Z0-9]{4}){2,7}(?: ?[A-Z0-9]{1,4})?\b"

STREET_ADDRESS_PATTERN = (
    r"\b\d{1,5}\s+(?:[A-Z][a-z]+\s+){1,3}"
    r"(?:Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|Court|Ct|Way)\b"
)

def _credit_card_valid(surface: str) -> bool:
    digits = re.sub(r"\D", "", surface)
    return 13 <= len(digits) <= 19 and luhn_valid(digits)

def _age_valid(surface: str) -> bool:
    number = re.search(r"\d{1,3}", surface)
    return number is not None and 1 <= int(number.group(0)) <= 120

def _iban_valid(surface: str) -> bool:
    return 15 <= len(surface.replace(" ", "")) <= 34

def email_recognizer() -> Recognizer:
    return PatternRecognizer("email", EntityType.EMAIL, EMAIL_PATTERN)

def phone_recognizer() -> Recognizer:
    return PatternRecognizer("phone", EntityType.PHONE, PHONE_PATTERN)

def ssn_recognizer() -> Recognizer:
    return PatternRecognizer("ssn", EntityType.SSN, SSN_PATTERN)

def credit_card_recognizer() -> Recognizer:
    return PatternRecognizer("credit_card", EntityType.CREDIT_CARD, CREDIT_CARD_PATTERN,
                             validator=_credit_card_valid)

def ip_address_recognizer() -> Recognizer:
    return PatternRecognizer("ip_address", EntityType.IP_ADDRESS, IP_ADDRESS_PATTERN)

def date_of_birth_recognizer() -> Recognizer:
    return PatternRecognizer("date_of_birth", EntityType.DATE_OF_BIRTH, DATE_PATTERN,
                             flags=re.IGNORECASE, context=BIRTH_CONTEXT)

def salary_recognizer() -> Recognizer:
    return PatternRecognizer("salary", EntityType.SALARY, SALARY_PATTERN, context=SALARY_CONTEXT)

def age_recognizer() -> Recognizer:
    return PatternRecognizer("age", EntityType.AGE, AGE_PATTERN, flags=re.IGNORECASE,
                             validator=_age_valid)

def bank_account_recognizer() -> Recognizer:
    return PatternRecognizer("bank_account", EntityType.BANK_ACCOUNT, BANK_ACCOUNT_PATTERN,
                             context=ACCOUNT_CONTEXT)

def iban_recognizer() -> Recognizer:
    return PatternRecognizer("iban", EntityType.IBAN, IBAN_PATTERN, validator=_iban_valid)

def street_address_recognizer() -> Recognizer:
    return PatternRecognizer("street_address", EntityType.LOCATION, STREET_ADDRESS_PATTERN)

# Order matters: it is the last tie-break when overlapping spans are resolved
PATTERN_RECOGNIZERS: Dict[str, Callable[[], Recognizer]] = {
    "credit_card": credit_card_recognizer,
    "ssn": ssn_recognizer,
    "iban": iban_recognizer,
    "bank_account": bank_account_recognizer,
    "email": email_recognizer,
    "phone": phone_recognizer,
    "ip_address": ip_address_recognizer,
    "date_of_birth": date_of_birth_recognizer,
    "salary": salary_recognizer,
    "age": age_recognizer,
    "street_address": street_address_recognizer,
}

# Gazetteer file name per entity type, relative to the gazetteer directory
GAZETTEER_FILES: Dict[EntityType, str] = {
    EntityType.PERSON: "person.txt",
    EntityType.LOCATION: "location.txt",
    EntityType.ORGANIZATION: "organization.txt",
    EntityType.MEDICAL_CONDITION: "medical_condition.txt",
    EntityType.ETHNICITY: "ethnicity.txt",
}

def load_gazetteer_recognizers(gazetteer_dir: Optional[str] = None) -> List[Recognizer]:
    """Build one gazetteer recognizer per gazetteer file present in the directory."""
    gazetteer_dir = gazetteer_dir or DEFAULT_GAZETTEER_DIR
    recognizers = []
    for entity_type, filename in GAZETTEER_FILES.items():
        path = os.path.join(gazetteer_dir, filename)
        if not os.path.exists(path):
            logger.warning(f"Gazetteer for {entity_type.value} not found at {path}")
            continue
        gazetteer = Gazetteer.from_file(entity_type, path)
        logger.debug(f"Loaded {len(gazetteer)} {entity_type.value} phrases")
        recognizers.append(GazetteerRecognizer(f"gazetteer_{entity_type.value.lower()}", gazetteer))
    return recognizers
