"""Memory-resident chat sessions with idle-TTL eviction."""

import time
import secrets
import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional

from session.core import SessionError
from session.pipeline import ChatSession

logger = logging.getLogger(__name__)

class SessionNotFoundError(SessionError):
    """Raised for a session id that is unknown or has expired."""
    pass

@dataclass
class _Entry:
    session: ChatSession
    last_activity: float
    lock: threading.Lock = field(default_factory=threading.Lock)

class SessionStore:
    """Session id -> ChatSession, with per-session exclusive access.

    Ids are unguessable URL-safe tokens. A session idle for longer than the TTL
    is evicted and its pseudonym map destroyed.
    """

    def __init__(self, ttl_seconds: float, clock: Callable[[], float] = time.monotonic):
        self.ttl = ttl_seconds
        self._clock = clock
        self._entries: Dict[str, _Entry] = {}
        self._lock = threading.Lock()

    @staticmethod
    def new_session_id() -> str:
        return secrets.token_urlsafe(24)

    def _expired(self, entry: _Entry, now: float) -> bool:
        return now - entry.last_activity > self.ttl

    def _destroy(self, session_id: str) -> None:
        entry = self._entries.pop(session_id, None)
        if entry is not None:
            entry.session.pmap.clear()
            logger.info(f"Session {session_id} ended")

    def create(self, factory: Callable[[str], ChatSession]) -> ChatSession:
        session_id = self.new_session_id()
        session = factory(session_id)
        with self._lock:
            self._entries[session_id] = _Entry(session, self._clock())
        logger.info(f"Session {session_id} created")
        return session

    def _entry(self, session_id: str) -> _Entry:
        with self._lock:
            entry = self._entries.get(session_id)
            if entry is None:
                raise SessionNotFoundError(f"Unknown session {session_id}")
            if self._expired(entry, self._clock()) and not entry.lock.locked():
                self._destroy(session_id)
                raise SessionNotFoundError(f"Session {session_id} has expired")
            return entry

    def get(self, session_id: str) -> ChatSession:
        return self._entry(session_id).session

    def __contains__(self, session_id: str) -> bool:
        try:
            self._entry(session_id)
        except SessionNotFoundError:
            return False
        return True

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    @contextmanager
    def checkout(self, session_id: str) -> Iterator[ChatSession]:
        """Exclusive access to one session.

        The last-activity time is refreshed on entry and on exit, and a held
        session is never evicted, so a slow turn cannot lose its pseudonyms.
        """
        entry = self._entry(session_id)
        with entry.lock:
            with self._lock:
                if self._entries.get(session_id) is not entry:
                    raise SessionNotFoundError(f"Session {session_id} ended while waiting")
            entry.last_activity = self._clock()
            try:
                yield entry.session
            finally:
                entry.last_activity = self._clock()

    def remove(self, session_id: str) -> None:
        with self._lock:
            self._destroy(session_id)

    def evict_expired(self) -> List[str]:
        """Drop every idle session past the TTL; returns the evicted ids."""
        now = self._clock()
        with self._lock:
            expired = [
                sid for sid, entry in self._entries.items()
                if self._expired(entry, now) and not entry.lock.locked()
            ]
            for session_id in expired:
                self._destroy(session_id)
        if expired:
            logger.info(f"Evicted {len(expired)} idle session(s)")
        return expired

    def session_ids(self) -> List[str]:
        with self._lock:
            return list(self._entries)

    def lookup(self, session_id: Optional[str]) -> Optional[ChatSession]:
        """The live session for an id, or None if absent, unknown or expired."""
        if not session_id:
            return None
        try:
            return self.get(session_id)
        except SessionNotFoundError:
            return None
