import os
import logging
import threading
from abc import ABC, abstractmethod
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import requests

from .core import UpstreamError

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "CAMP_UPSTREAM_API_KEY"

Message = Dict[str, str]

class UpstreamClient(ABC):
    """Untrusted model endpoint. Receives sanitized context windows only."""

    @abstractmethod
    def complete(self, messages: Sequence[Message]) -> str:
        """Send an ordered list of {role, content} messages and return the reply text."""
        pass

class ScriptedUpstream(UpstreamClient):
    """Replays a fixed list of responses in order; the last one repeats once exhausted."""

    def __init__(self, responses: Sequence[str]):
        if not responses:
            raise ValueError("ScriptedUpstream needs at least one response")
        self.responses = list(responses)
        self.calls: List[List[Message]] = []
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[Message]) -> str:
        with self._lock:
            index = min(len(self.calls), len(self.responses) - 1)
            self.calls.append([dict(m) for m in messages])
            return self.responses[index]

class EchoUpstream(UpstreamClient):
    """Acknowledges the latest user message verbatim, so pseudonyms come back in the reply."""

    def __init__(self):
        self.calls: List[List[Message]] = []
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[Message]) -> str:
        with self._lock:
            self.calls.append([dict(m) for m in messages])
        last_user = next((m["content"] for m in reversed(messages) if m["role"] == "user"), "")
        return f"Understood. You said: {last_user}"

class TemplatedUpstream(UpstreamClient):
    """Templated replies that mention one known phrase from the context window.

    `vocabulary` is read on every call. Phrases present in the window are
    named in rotation, one per reply; with none present the fallback is used.
    """

    def __init__(
        self,
        vocabulary: Callable[[], Iterable[str]] = tuple,
        template: str = "Noted. I will keep {value} in mind.",
        fallback: str = "Noted.",
    ):
        self.vocabulary = vocabulary
        self.template = template
        self.fallback = fallback
        self.calls: List[List[Message]] = []
        self._lock = threading.Lock()

    def complete(self, messages: Sequence[Message]) -> str:
        window = "\n".join(m["content"] for m in messages)
        present = sorted({v for v in self.vocabulary() if v and v in window}, key=lambda v: (-len(v), v))
        with self._lock:
            turn = len(self.calls)
            self.calls.append([dict(m) for m in messages])
        if not present:
            return self.fallback
        return self.template.format(value=present[turn % len(present)])

class FailingUpstream(UpstreamClient):
    """Always fails; used to exercise replay of a failed turn."""

    def __init__(self, message: str = "upstream unavailable", retryable: bool = True):
        self.message = message
        self.retryable = retryable
        self.calls = 0

    def complete(self, messages: Sequence[Message]) -> str:
        self.calls += 1
        raise UpstreamError(self.message, retryable=self.retryable)

class ChatCompletionClient(UpstreamClient):
    """Client for a standard chat-completion endpoint.

    The credential is read from an environment variable and only ever placed
    in the Authorization header; it is never logged.
    """

    def __init__(
        self,
        url: str,
        model: str,
        api_key_env: str = DEFAULT_API_KEY_ENV,
        timeout: float = 30.0,
        retries: int = 1,
        session: Optional[requests.Session] = None,
    ):
        if not url:
            raise ValueError("Upstream URL is required")
        self.url = url
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.retries = max(0, retries)
        self.http = session or requests.Session()

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        api_key = os.getenv(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        else:
            logger.warning(f"No upstream credential in ${self.api_key_env}; sending unauthenticated request")
        return headers

    def _post(self, payload: Dict) -> str:
        try:
            response = self.http.post(self.url, headers=self._headers(), json=payload, timeout=self.timeout)
            response.raise_for_status()
        except requests.exceptions.HTTPError as e:
            status = e.response.status_code if e.response is not None else None
            # Client errors other than rate limiting will not succeed on retry
            retryable = status is None or status == 429 or status >= 500
            raise UpstreamError(f"Upstream returned HTTP {status}", retryable=retryable)
        except requests.exceptions.RequestException as e:
            raise UpstreamError(f"Error calling upstream model: {type(e).__name__}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise UpstreamError("Malformed upstream response", retryable=False)

    def complete(self, messages: Sequence[Message]) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
        }
        attempt = 0
        while True:
            try:
                logger.debug(f"Sending {len(messages)} messages to upstream model {self.model}")
                return self._post(payload)
            except UpstreamError as e:
                if not e.retryable or attempt >= self.retries:
                    logger.error(f"Upstream call failed after {attempt + 1} attempt(s): {str(e)}")
                    raise
                attempt += 1
                logger.warning(f"Upstream call failed ({str(e)}), retrying")
