import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from .core import DetectionSpan, EntityType, Recognizer
from .entity_mappings import SensitivityWeights, DEFAULT_SENSITIVITY, is_hard_blocked
from .recognizers import PATTERN_RECOGNIZERS, load_gazetteer_recognizers

logger = logging.getLogger(__name__)

class RecognizerSet:
    """Ordered, immutable collection of recognizers.

    The order is the final tie-break when two candidate spans are otherwise
    equal under the overlap-resolution policy (hard-blocked first, then
    longer span, higher weight and earlier start).
    """

    def __init__(self, recognizers: Iterable[Recognizer], weights: SensitivityWeights = DEFAULT_SENSITIVITY):
        self._recognizers: Tuple[Recognizer, ...] = tuple(recognizers)
        self.weights = weights

    @property
    def recognizers(self) -> Tuple[Recognizer, ...]:
        return self._recognizers

    @property
    def entity_types(self) -> List[EntityType]:
        seen = []
        for recognizer in self._recognizers:
            if recognizer.entity_type not in seen:
                seen.append(recognizer.entity_type)
        return seen

    def restricted_to(self, entity_types: Iterable[EntityType]) -> "RecognizerSet":
        """A new set keeping only recognizers whose type is listed, in the same order."""
        allowed = set(entity_types)
        return RecognizerSet([r for r in self._recognizers if r.entity_type in allowed], self.weights)

    def __len__(self) -> int:
        return len(self._recognizers)

    def __iter__(self):
        return iter(self._recognizers)

def build_default_recognizers(
    gazetteer_dir: Optional[str] = None,
    weights: SensitivityWeights = DEFAULT_SENSITIVITY,
) -> RecognizerSet:
    """Built-in pattern recognizers followed by the bundled gazetteer recognizers."""
    recognizers: List[Recognizer] = [factory() for factory in PATTERN_RECOGNIZERS.values()]
    recognizers.extend(load_gazetteer_recognizers(gazetteer_dir))
    logger.debug(f"Built recognizer set with {len(recognizers)} recognizers")
    return RecognizerSet(recognizers, weights)

def resolve_overlaps(
    spans: Sequence[DetectionSpan],
    weights: SensitivityWeights = DEFAULT_SENSITIVITY,
) -> List[DetectionSpan]:
    """Keep a maximal non-overlapping subset of spans, sorted by start offset.

    Hard-blocked spans are placed first, so no other span can displace them.
    Otherwise the longer span wins; ties go to the higher entity weight, then
    the earlier start, then the earlier position in the input (recognizer order).
    """
    ranked = sorted(
        enumerate(spans),
        key=lambda item: (
            not is_hard_blocked(item[1].entity_type),
            -item[1].length,
            -weights.weight(item[1].entity_type),
            item[1].start,
            item[0],
        ),
    )
    kept: List[DetectionSpan] = []
    for _, span in ranked:
        if any(span.overlaps(other) for other in kept):
            continue
        kept.append(span)
    return sorted(kept, key=lambda s: (s.start, s.end))

def detect(text: str, recognizers: RecognizerSet, turn: int = 0) -> List[DetectionSpan]:
    """Detect PII spans in one message.

    Returns non-overlapping spans sorted by start offset, each tagged with the
    given turn index.
    """
    if not text:
        return []
    candidates: List[DetectionSpan] = []
    for recognizer in recognizers:
        for span in recognizer.find(text):
            candidates.append(DetectionSpan(span.entity_type, span.start, span.end, span.text, turn))
    resolved = resolve_overlaps(candidates, recognizers.weights)
    if resolved:
        logger.debug(f"Turn {turn}: {len(resolved)} spans ({', '.join(s.entity_type.value for s in resolved)})")
    return resolved
