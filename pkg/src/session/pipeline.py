"""
Per-turn processing for one chat session.

extract -> hard-block -> record -> update graph -> score -> (once CPE >= tau)
pseudonymize the full history -> send upstream -> de-mask -> return.

Everything that leaves the session goes through `assemble_context`; the
outbound transcript keeps a verbatim copy of every window handed to the
upstream client.
"""

import logging
import uuid
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from pii_detection.core import DetectionSpan, EntityType
from pii_detection.entity_mappings import BLOCKED_PLACEHOLDER, is_hard_blocked
from pii_detection.extractor import RecognizerSet, build_default_recognizers, detect
from .core import Mode, TurnOrderError, UpstreamError
from .pseudonym import PseudonymMap, Seed, block_registered, demask, rewrite_history
from .registry import SessionRegistry
from .risk import CooccurrenceGraph, CpeTrace, RiskConfig, check_threshold, cpe_score
from .upstream import Message, UpstreamClient

logger = logging.getLogger(__name__)

USER = "user"
ASSISTANT = "assistant"

@dataclass
class Turn:
    """One recorded message.

    For user turns `sanitized` is the hard-blocked text. For assistant turns it
    is the raw upstream reply (pseudonym domain once the session has
    triggered) and `original` is the de-masked text the caller received.
    """
    role: str
    original: str
    sanitized: str
    index: int

class OutboundTranscript:
    """Append-only record of every context window sent upstream."""

    def __init__(self):
        self._windows: List[List[Message]] = []

    def append(self, window: Sequence[Message]) -> None:
        self._windows.append([dict(m) for m in window])

    @property
    def windows(self) -> List[List[Message]]:
        return [list(w) for w in self._windows]

    @property
    def final(self) -> List[Message]:
        return list(self._windows[-1]) if self._windows else []

    def texts(self) -> List[str]:
        """Every window flattened to one string, in send order."""
        return [_flatten(w) for w in self._windows]

    def __len__(self) -> int:
        return len(self._windows)

def _flatten(window: Sequence[Message]) -> str:
    return "\n".join(m["content"] for m in window)

@dataclass
class ChatSession:
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    config: RiskConfig = field(default_factory=RiskConfig)
    recognizers: Optional[RecognizerSet] = None
    seed: Seed = 0
    turns: List[Turn] = field(default_factory=list)
    mode: Mode = Mode.PASS_THROUGH
    pending: bool = False

    def __post_init__(self):
        if self.recognizers is None:
            self.recognizers = build_default_recognizers(weights=self.config.weights)
        self.registry = SessionRegistry(self.session_id)
        self.graph = CooccurrenceGraph(self.config.edge_policy)
        self.trace = CpeTrace()
        self.pmap = PseudonymMap(self.seed)
        self.transcript = OutboundTranscript()
        self.graph_history: List[Dict[str, Any]] = []

    @property
    def user_turn_count(self) -> int:
        return sum(1 for t in self.turns if t.role == USER)

    @property
    def cpe(self) -> float:
        return self.trace.current

    @property
    def triggered(self) -> bool:
        return self.trace.triggered

    @property
    def blocked_types(self) -> List[EntityType]:
        return sorted({e.entity_type for e in self.registry.entities() if e.blocked}, key=lambda t: t.value)

    def risk_export(self) -> Dict[str, Any]:
        """Graph and redacted registry view for operators; contains no raw values."""
        return {
            "session_id": self.session_id,
            "mode": self.mode.value,
            "trigger_turn": self.trace.trigger_turn,
            "cpe_series": [round(v, 10) for v in self.trace.values],
            "graph": self.graph.export(self.config, self.cpe, self.triggered),
            "registry": self.registry.snapshot().export(),
        }

def hard_block(text: str, spans: Sequence[DetectionSpan]) -> str:
    """Replace every hard-blocked span with the blocked placeholder."""
    blocked = sorted((s for s in spans if is_hard_blocked(s.entity_type)), key=lambda s: s.start, reverse=True)
    for span in blocked:
        text = text[:span.start] + BLOCKED_PLACEHOLDER + text[span.end:]
    return text

def assemble_context(session: ChatSession) -> List[Message]:
    """Full sanitized history in arrival order, pseudonymized once the session has triggered.

    Registered hard-blocked values are replaced in every text on every send,
    including repeats the extractor did not flag again.
    """
    texts = [t.sanitized for t in session.turns]
    snapshot = session.registry.snapshot()
    if session.mode is Mode.PSEUDONYMIZE:
        texts = rewrite_history(texts, snapshot, session.pmap)
    else:
        texts = block_registered(texts, snapshot)
    return [{"role": t.role, "content": text} for t, text in zip(session.turns, texts)]

def _send(session: ChatSession, client: UpstreamClient) -> str:
    context = assemble_context(session)
    session.transcript.append(context)
    try:
        raw = client.complete(context)
    except UpstreamError:
        raise
    except Exception as e:
        raise UpstreamError(f"Upstream client failed: {type(e).__name__}")
    response = demask(raw, session.pmap) if len(session.pmap) else raw
    session.turns.append(Turn(ASSISTANT, response, raw, session.user_turn_count - 1))
    session.pending = False
    return response

def process_turn(session: ChatSession, message: str, client: UpstreamClient) -> str:
    """Run one user message through the session and return the de-masked reply.

    Detection errors leave the session untouched. An upstream failure keeps
    the recorded user turn, re-raises, and leaves the turn replayable with
    `retry_last_turn`.
    """
    turn = session.user_turn_count
    spans = detect(message, session.recognizers, turn)

    if session.pending:
        logger.warning(f"Session {session.session_id}: turn {turn - 1} was never answered, continuing")
    new_types = session.registry.record(turn, spans)
    session.graph.update(new_types, [s.entity_type for s in spans])
    score = cpe_score(session.graph, session.config)
    session.trace.append(score)
    triggered = check_threshold(session.trace, score, session.config.tau)
    session.graph_history.append(dict(session.graph.export(session.config, score, triggered), turn=turn))
    logger.debug(f"Session {session.session_id} turn {turn}: {len(spans)} spans, CPE {score:.2f}")

    if triggered and session.mode is Mode.PASS_THROUGH:
        session.mode = Mode.PSEUDONYMIZE
        logger.info(
            f"Session {session.session_id}: CPE {score:.2f} >= {session.config.tau} at turn {turn}, "
            f"pseudonymizing history"
        )

    session.turns.append(Turn(USER, message, hard_block(message, spans), turn))
    session.pending = True
    return _send(session, client)

def retry_last_turn(session: ChatSession, client: UpstreamClient) -> str:
    """Re-send the last user turn after an upstream failure, without recording it again."""
    if not session.pending:
        raise TurnOrderError(f"Session {session.session_id} has no unanswered turn to retry")
    logger.info(f"Session {session.session_id}: retrying turn {session.user_turn_count - 1}")
    return _send(session, client)

def _exposed_types(text: str, registry: SessionRegistry) -> List[EntityType]:
    return sorted({e.entity_type for e in registry.entities() if e.value in text}, key=lambda t: t.value)

def exposure_metric(transcript: OutboundTranscript, registry: SessionRegistry) -> int:
    """Distinct entity types whose real value is present in the final window sent upstream."""
    if not len(transcript):
        return 0
    return len(_exposed_types(_flatten(transcript.final), registry))

def exposure_ever(transcript: OutboundTranscript, registry: SessionRegistry) -> int:
    """Distinct entity types whose real value was present in any window sent upstream."""
    return len(_exposed_types("\n".join(transcript.texts()), registry))

def exposed_types(transcript: OutboundTranscript, registry: SessionRegistry) -> List[EntityType]:
    if not len(transcript):
        return []
    return _exposed_types(_flatten(transcript.final), registry)
