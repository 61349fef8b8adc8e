import logging
from enum import Enum

logger = logging.getLogger(__name__)

class Mode(str, Enum):
    """Outbound handling mode of a chat session."""
    PASS_THROUGH = "PASS_THROUGH"
    PSEUDONYMIZE = "PSEUDONYMIZE"

def redact_value(value: str) -> str:
    """Audit-safe form of a real value: first character plus length."""
    if not value:
        return ""
    return f"{value[0]}***({len(value)})"

class SessionError(Exception):
    """Base exception for session-level processing errors."""
    pass

class TurnOrderError(SessionError):
    """Raised when detections are recorded for a turn earlier than one already recorded."""
    pass

class GraphDomainError(SessionError):
    """Raised when an entity type is queried that is not a node of the graph."""
    pass

class PseudonymGenerationError(SessionError):
    """Raised when no unused synthetic value could be generated."""
    pass

class UpstreamError(SessionError):
    """Raised when the upstream model call fails."""

    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable
