"""
Co-occurrence graph and Cumulative PII Exposure (CPE) scoring.

Each node is an entity type seen in the session. Under the default
SESSION_COMPLETE policy every pair of session types is connected; the
SAME_TURN policy only connects types disclosed in the same message. A node's
combination amplifier is 1 + alpha * deg(v), and the CPE score is the sum of
amplified base weights over the scored nodes.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional

import networkx as nx

from pii_detection.core import EntityType
from pii_detection.entity_mappings import SensitivityWeights, DEFAULT_SENSITIVITY, is_hard_blocked
from .core import GraphDomainError

logger = logging.getLogger(__name__)

class EdgePolicy(str, Enum):
    SESSION_COMPLETE = "SESSION_COMPLETE"
    SAME_TURN = "SAME_TURN"

@dataclass
class RiskConfig:
    """Scoring parameters for one session."""
    alpha: float = 0.3
    tau: float = 2.0
    weights: SensitivityWeights = DEFAULT_SENSITIVITY
    include_hard_blocked_in_score: bool = False
    edge_policy: EdgePolicy = EdgePolicy.SESSION_COMPLETE

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        self.edge_policy = EdgePolicy(self.edge_policy)

    def is_scored(self, entity_type: EntityType) -> bool:
        return self.include_hard_blocked_in_score or not is_hard_blocked(entity_type)

class CooccurrenceGraph:
    """Monotonically growing graph over the entity types seen in a session."""

    def __init__(self, edge_policy: EdgePolicy = EdgePolicy.SESSION_COMPLETE):
        self.edge_policy = EdgePolicy(edge_policy)
        self._graph = nx.Graph()

    @property
    def nodes(self) -> List[EntityType]:
        return list(self._graph.nodes)

    @property
    def edges(self) -> List[tuple]:
        return list(self._graph.edges)

    def number_of_nodes(self) -> int:
        return self._graph.number_of_nodes()

    def number_of_edges(self) -> int:
        return self._graph.number_of_edges()

    def __contains__(self, entity_type: EntityType) -> bool:
        return entity_type in self._graph

    def degree(self, entity_type: EntityType) -> int:
        if entity_type not in self._graph:
            raise GraphDomainError(f"{entity_type.value} is not in the co-occurrence graph")
        return self._graph.degree(entity_type)

    def update(self, new_types: Iterable[EntityType], turn_types: Optional[Iterable[EntityType]] = None) -> "CooccurrenceGraph":
        """Add new entity types and the edges the policy implies. Nothing is ever removed.

        `turn_types` are all types present in the current message; only the
        SAME_TURN policy uses them.
        """
        self._graph.add_nodes_from(new_types)
        if self.edge_policy is EdgePolicy.SESSION_COMPLETE:
            self._graph.add_edges_from(combinations(list(self._graph.nodes), 2))
        else:
            present = [t for t in (turn_types or []) if t in self._graph]
            self._graph.add_edges_from(combinations(dict.fromkeys(present), 2))
        return self

    def scoring_view(self, config: RiskConfig) -> nx.Graph:
        """Subgraph induced by the types that contribute to the score."""
        return self._graph.subgraph([v for v in self._graph.nodes if config.is_scored(v)])

    def copy(self) -> "CooccurrenceGraph":
        clone = CooccurrenceGraph(self.edge_policy)
        clone._graph = self._graph.copy()
        return clone

    def export(self, config: RiskConfig, cpe: Optional[float] = None, triggered: bool = False) -> Dict[str, Any]:
        """Structured snapshot for the risk-inspection endpoint and reports."""
        view = self.scoring_view(config)
        nodes = []
        for v in sorted(self._graph.nodes, key=lambda t: t.value):
            scored = v in view
            degree = view.degree(v) if scored else self._graph.degree(v)
            nodes.append({
                "type": v.value,
                "weight": config.weights.weight(v),
                "degree": degree,
                "amplifier": round(1.0 + config.alpha * degree, 10),
                "scored": scored,
            })
        edges = sorted(sorted([u.value, v.value]) for u, v in self._graph.edges)
        return {
            "nodes": nodes,
            "edges": edges,
            "cpe": round(cpe if cpe is not None else cpe_score(self, config), 10),
            "tau": config.tau,
            "alpha": config.alpha,
            "triggered": triggered,
        }

def update_graph(graph: CooccurrenceGraph, new_types: Iterable[EntityType],
                 turn_types: Optional[Iterable[EntityType]] = None) -> CooccurrenceGraph:
    return graph.update(new_types, turn_types)

def amplifier(graph: CooccurrenceGraph, v: EntityType, alpha: float) -> float:
    """Combination amplifier f(v) = 1 + alpha * deg(v)."""
    return 1.0 + alpha * graph.degree(v)

def cpe_score(graph: CooccurrenceGraph, config: RiskConfig) -> float:
    """Sum of amplified base weights over the scored nodes; 0 for an empty graph."""
    view = graph.scoring_view(config)
    return sum(config.weights.weight(v) * (1.0 + config.alpha * view.degree(v)) for v in view.nodes)

@dataclass
class CpeTrace:
    """Per-turn CPE values and the first turn at which the threshold was met."""
    values: List[float] = field(default_factory=list)
    trigger_index: Optional[int] = None

    def append(self, score: float) -> None:
        if self.values and score < self.values[-1]:
            raise ValueError(f"CPE decreased from {self.values[-1]} to {score}")
        self.values.append(score)

    @property
    def triggered(self) -> bool:
        return self.trigger_index is not None

    @property
    def trigger_turn(self) -> Optional[int]:
        """1-based turn number of the first crossing."""
        return None if self.trigger_index is None else self.trigger_index + 1

    @property
    def current(self) -> float:
        return self.values[-1] if self.values else 0.0

def check_threshold(trace: CpeTrace, score: float, tau: float) -> bool:
    """True iff score >= tau; the trigger is recorded on the first crossing only."""
    triggered = score >= tau
    if triggered and trace.trigger_index is None:
        trace.trigger_index = len(trace.values) - 1
        logger.info(f"CPE {score:.2f} reached threshold {tau} at turn index {trace.trigger_index}")
    return triggered
