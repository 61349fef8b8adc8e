"""
Replays scenario fixtures under three protection modes:

- CAMP: the full session pipeline (hard block, CPE tracking, retroactive
  pseudonymization, de-masking).
- PER_TURN_BASELINE: a stateless masker over structured entity types.
- NONE: messages are forwarded verbatim.

Risk is measured the same way in every mode, with the full recognizer set, so
CPE series are comparable across modes.
"""

import time
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from pii_detection.core import EntityType
from pii_detection.entity_mappings import is_hard_blocked
from pii_detection.extractor import RecognizerSet, build_default_recognizers, detect
from session.pipeline import ChatSession, OutboundTranscript, exposed_types, exposure_ever, exposure_metric, process_turn
from session.pseudonym import Seed
from session.registry import SessionRegistry
from session.risk import CooccurrenceGraph, CpeTrace, RiskConfig, cpe_score
from session.upstream import Message, TemplatedUpstream, UpstreamClient
from .scenario import ScenarioSpec, SweepConsistencyError, validate

logger = logging.getLogger(__name__)

# Builds the mock upstream for one run from the phrases it may mention
ClientFactory = Callable[[Callable[[], Iterable[str]]], UpstreamClient]

class ProtectionMode(str, Enum):
    CAMP = "CAMP"
    PER_TURN_BASELINE = "PER_TURN_BASELINE"
    NONE = "NONE"

    @classmethod
    def parse(cls, name: str) -> "ProtectionMode":
        aliases = {"camp": cls.CAMP, "baseline": cls.PER_TURN_BASELINE, "none": cls.NONE}
        key = name.strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        return cls(key.upper())

class BaselineMasker:
    """Stateless per-message masker; each message is evaluated on its own."""

    DEFAULT_TYPES = (
        EntityType.EMAIL,
        EntityType.PHONE,
        EntityType.SSN,
        EntityType.CREDIT_CARD,
        EntityType.IP_ADDRESS,
        EntityType.BANK_ACCOUNT,
        EntityType.IBAN,
    )

    def __init__(self, recognizers: RecognizerSet, entity_types: Iterable[EntityType] = DEFAULT_TYPES):
        self.entity_types = tuple(entity_types)
        self.recognizers = recognizers.restricted_to(self.entity_types)

    def mask(self, text: str) -> str:
        for span in sorted(detect(text, self.recognizers), key=lambda s: s.start, reverse=True):
            text = text[:span.start] + f"[{span.entity_type.value}]" + text[span.end:]
        return text

@dataclass
class RunReport:
    """Outcome of replaying one scenario under one protection mode and threshold."""
    scenario_id: str
    mode: ProtectionMode
    tau: float
    alpha: float
    cpe_series: List[float]
    trigger_turn: Optional[int]
    exposure_final: int
    exposure_ever: int
    blocked_types: List[str]
    exposed_types: List[str] = field(default_factory=list)
    seed: Seed = 0
    duration_seconds: float = 0.0
    graph_evolution: List[Dict[str, Any]] = field(default_factory=list, repr=False)
    audit: Dict[str, Any] = field(default_factory=dict, repr=False)
    responses: List[str] = field(default_factory=list, repr=False)

    @property
    def final_cpe(self) -> float:
        return self.cpe_series[-1] if self.cpe_series else 0.0

    def summary_row(self) -> Dict[str, Any]:
        """Stable-order summary record; excludes wall-clock time so reruns are identical."""
        return {
            "scenario": self.scenario_id,
            "mode": self.mode.value,
            "tau": self.tau,
            "alpha": self.alpha,
            "trigger_turn": self.trigger_turn,
            "exposure_final": self.exposure_final,
            "exposure_ever": self.exposure_ever,
            "final_cpe": round(self.final_cpe, 4),
        }

def _blocked_types(registry: SessionRegistry, transcript: OutboundTranscript) -> List[str]:
    """Hard-blocked types disclosed in the session whose values never went upstream."""
    sent = "\n".join(transcript.texts())
    blocked = set()
    leaked = set()
    for entity in registry.entities():
        if not is_hard_blocked(entity.entity_type):
            continue
        if entity.value in sent:
            leaked.add(entity.entity_type)
        else:
            blocked.add(entity.entity_type)
    return sorted(t.value for t in blocked - leaked)

def _run_camp(spec: ScenarioSpec, config: RiskConfig, seed: Seed,
              recognizers: RecognizerSet, client_factory: ClientFactory) -> RunReport:
    session = ChatSession(session_id=spec.id, config=config, recognizers=recognizers, seed=seed)
    # Replies name pseudonyms present in the window
    client = client_factory(lambda: session.pmap.reverse)
    responses = [process_turn(session, turn.text, client) for turn in spec.turns]
    return RunReport(
        scenario_id=spec.id,
        mode=ProtectionMode.CAMP,
        tau=config.tau,
        alpha=config.alpha,
        cpe_series=list(session.trace.values),
        trigger_turn=session.trace.trigger_turn,
        exposure_final=exposure_metric(session.transcript, session.registry),
        exposure_ever=exposure_ever(session.transcript, session.registry),
        blocked_types=_blocked_types(session.registry, session.transcript),
        exposed_types=[t.value for t in exposed_types(session.transcript, session.registry)],
        seed=seed,
        graph_evolution=list(session.graph_history),
        audit={"registry": session.registry.snapshot().export(), "pseudonyms": session.pmap.audit_export()},
        responses=responses,
    )

def _run_unprotected(spec: ScenarioSpec, mode: ProtectionMode, config: RiskConfig, seed: Seed,
                     recognizers: RecognizerSet, client_factory: ClientFactory) -> RunReport:
    masker = BaselineMasker(recognizers) if mode is ProtectionMode.PER_TURN_BASELINE else None
    registry = SessionRegistry(spec.id)
    client = client_factory(lambda: [e.value for e in registry.entities()])
    responses: List[str] = []
    graph = CooccurrenceGraph(config.edge_policy)
    trace = CpeTrace()
    transcript = OutboundTranscript()
    history: List[Message] = []
    evolution = []
    for index, turn in enumerate(spec.turns):
        spans = detect(turn.text, recognizers, index)
        graph.update(registry.record(index, spans), [s.entity_type for s in spans])
        score = cpe_score(graph, config)
        trace.append(score)
        evolution.append(dict(graph.export(config, score, False), turn=index))

        outbound = masker.mask(turn.text) if masker else turn.text
        history.append({"role": "user", "content": outbound})
        transcript.append(history)
        responses.append(client.complete(history))
        history.append({"role": "assistant", "content": responses[-1]})
    return RunReport(
        scenario_id=spec.id,
        mode=mode,
        tau=config.tau,
        alpha=config.alpha,
        cpe_series=list(trace.values),
        trigger_turn=None,
        exposure_final=exposure_metric(transcript, registry),
        exposure_ever=exposure_ever(transcript, registry),
        blocked_types=_blocked_types(registry, transcript),
        exposed_types=[t.value for t in exposed_types(transcript, registry)],
        seed=seed,
        graph_evolution=evolution,
        audit={"registry": registry.snapshot().export(), "pseudonyms": {"pairs": []}},
        responses=responses,
    )

def run_scenario(
    spec: ScenarioSpec,
    mode: ProtectionMode = ProtectionMode.CAMP,
    config: Optional[RiskConfig] = None,
    seed: Seed = 0,
    recognizers: Optional[RecognizerSet] = None,
    client_factory: ClientFactory = TemplatedUpstream,
) -> RunReport:
    """Replay a validated scenario against a mock upstream and fill a RunReport.

    The default mock names one phrase from its context window per reply, so
    in CAMP runs every post-trigger reply carries a pseudonym to de-mask.
    """
    validate(spec)
    config = config or RiskConfig()
    recognizers = recognizers or build_default_recognizers(weights=config.weights)
    mode = ProtectionMode(mode)
    started = time.perf_counter()
    if mode is ProtectionMode.CAMP:
        report = _run_camp(spec, config, seed, recognizers, client_factory)
    else:
        report = _run_unprotected(spec, mode, config, seed, recognizers, client_factory)
    report.duration_seconds = time.perf_counter() - started
    logger.info(
        f"{spec.id} {mode.value} tau={config.tau}: trigger={report.trigger_turn} "
        f"exposure_final={report.exposure_final} final_cpe={report.final_cpe:.2f}"
    )
    return report

def _trigger_order(turn: Optional[int]) -> float:
    return float("inf") if turn is None else float(turn)

def sweep(
    spec: ScenarioSpec,
    taus: Sequence[float],
    alpha: float = 0.3,
    seed: Seed = 0,
    recognizers: Optional[RecognizerSet] = None,
    base_config: Optional[RiskConfig] = None,
) -> List[RunReport]:
    """One CAMP run per threshold; trigger turns must not decrease as tau grows."""
    if not taus:
        raise ValueError("At least one threshold is required")
    if list(taus) != sorted(taus):
        raise ValueError(f"Thresholds must be ascending, got {list(taus)}")
    base = base_config or RiskConfig(alpha=alpha)
    recognizers = recognizers or build_default_recognizers(weights=base.weights)
    reports = []
    for tau in taus:
        config = RiskConfig(
            alpha=alpha,
            tau=tau,
            weights=base.weights,
            include_hard_blocked_in_score=base.include_hard_blocked_in_score,
            edge_policy=base.edge_policy,
        )
        reports.append(run_scenario(spec, ProtectionMode.CAMP, config, seed, recognizers))
    for earlier, later in zip(reports, reports[1:]):
        if _trigger_order(later.trigger_turn) < _trigger_order(earlier.trigger_turn):
            raise SweepConsistencyError(
                f"{spec.id}: trigger turn {later.trigger_turn} at tau={later.tau} precedes "
                f"{earlier.trigger_turn} at tau={earlier.tau}"
            )
    return reports

def trigger_matrix(reports: Iterable[RunReport]) -> Dict[str, Dict[float, Optional[int]]]:
    """scenario id -> {tau: trigger turn} over CAMP reports."""
    matrix: Dict[str, Dict[float, Optional[int]]] = {}
    for report in reports:
        if report.mode is ProtectionMode.CAMP:
            matrix.setdefault(report.scenario_id, {})[report.tau] = report.trigger_turn
    return matrix
