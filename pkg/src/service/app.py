"""
HTTP chat proxy around the session pipeline.

    POST /v1/chat                    one user turn; creates a session if needed
    POST /v1/session/{id}/retry      replay a turn whose upstream call failed
    GET  /v1/session/{id}/risk       graph and redacted registry snapshot
    GET  /healthz                    liveness

Request and response bodies never carry raw registered values beyond the
caller's own de-masked reply; log lines carry session ids, counts and scores
only.
"""

import asyncio
import logging
import secrets
from contextlib import asynccontextmanager
from typing import List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from pii_detection.core import PiiDetectionError
from session.core import TurnOrderError, UpstreamError
from session.pipeline import ChatSession, process_turn, retry_last_turn
from session.upstream import ChatCompletionClient, EchoUpstream, UpstreamClient
from .config import ServiceConfig
from .store import SessionNotFoundError, SessionStore

logger = logging.getLogger(__name__)

RETRY_AFTER_SECONDS = 2

class ChatRequest(BaseModel):
    session_id: Optional[str] = None
    message: str

class ChatMeta(BaseModel):
    cpe: float
    triggered: bool
    trigger_turn: Optional[int] = None
    blocked_types: List[str] = []

class ChatResponse(BaseModel):
    session_id: str
    response: str
    meta: Optional[ChatMeta] = None

def build_upstream_client(config: ServiceConfig) -> UpstreamClient:
    if not config.upstream_url:
        logger.warning("No upstream URL configured; replies are echoed locally")
        return EchoUpstream()
    return ChatCompletionClient(
        config.upstream_url,
        config.upstream_model,
        api_key_env=config.api_key_env,
        timeout=config.upstream_timeout,
        retries=config.upstream_retries,
    )

def _meta(session: ChatSession) -> ChatMeta:
    return ChatMeta(
        cpe=round(session.cpe, 4),
        triggered=session.triggered,
        trigger_turn=session.trace.trigger_turn,
        blocked_types=[t.value for t in session.blocked_types],
    )

def _upstream_failure(session_id: str, error: UpstreamError) -> JSONResponse:
    body = {"detail": "Upstream model request failed", "session_id": session_id, "retryable": error.retryable}
    headers = {}
    if error.retryable:
        body["retry_after"] = RETRY_AFTER_SECONDS
        headers["Retry-After"] = str(RETRY_AFTER_SECONDS)
    return JSONResponse(status_code=502, content=body, headers=headers)

def create_app(
    config: Optional[ServiceConfig] = None,
    client: Optional[UpstreamClient] = None,
    store: Optional[SessionStore] = None,
    eviction_interval: Optional[float] = None,
) -> FastAPI:
    """Build the service. Recognizers and weights are loaded once and shared by all sessions."""
    config = config or ServiceConfig.from_env()
    weights = config.load_weights()
    recognizers = config.build_recognizers(weights)
    client = client or build_upstream_client(config)
    store = store or SessionStore(config.session_ttl)
    interval = eviction_interval or min(config.session_ttl, 60.0)

    def new_session(session_id: str) -> ChatSession:
        seed = config.seed if config.seed is not None else secrets.randbits(32)
        return ChatSession(
            session_id=session_id,
            config=config.risk_config(weights),
            recognizers=recognizers,
            seed=seed,
        )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        async def evict_periodically():
            while True:
                await asyncio.sleep(interval)
                store.evict_expired()

        task = asyncio.create_task(evict_periodically())
        try:
            yield
        finally:
            task.cancel()

    app = FastAPI(title="CAMP chat proxy", lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.client = client

    @app.post("/v1/chat", response_model=ChatResponse, response_model_exclude_none=True)
    def handle_chat(request: ChatRequest):
        if not request.message.strip():
            raise HTTPException(status_code=400, detail="Message must not be empty")
        if len(request.message) > config.max_message_chars:
            raise HTTPException(
                status_code=400,
                detail=f"Message exceeds {config.max_message_chars} characters",
            )
        session = store.lookup(request.session_id)
        if session is None:
            session = store.create(new_session)
        session_id = session.session_id
        try:
            with store.checkout(session_id) as session:
                response = process_turn(session, request.message, client)
                meta = _meta(session) if config.expose_meta else None
        except SessionNotFoundError:
            raise HTTPException(status_code=404, detail="Session not found")
        except UpstreamError as e:
            logger.error(f"Session {session_id}: {str(e)}")
            return _upstream_failure(session_id, e)
        except PiiDetectionError as e:
            logger.error(f"Session {session_id}: detection failed: {type(e).__name__}")
            raise HTTPException(status_code=500, detail="PII detection failed")
        return ChatResponse(session_id=session_id, response=response, meta=meta)

    @app.post("/v1/session/{session_id}/retry", response_model=ChatResponse, response_model_exclude_none=True)
    def handle_retry(session_id: str):
        try:
            with store.checkout(session_id) as session:
                response = retry_last_turn(session, client)
                meta = _meta(session) if config.expose_meta else None
        except SessionNotFoundError:
            raise HTTPException(status_code=404, detail="Session not found")
        except TurnOrderError:
            raise HTTPException(status_code=409, detail="No failed turn to retry")
        except UpstreamError as e:
            logger.error(f"Session {session_id}: {str(e)}")
            return _upstream_failure(session_id, e)
        return ChatResponse(session_id=session_id, response=response, meta=meta)

    @app.get("/v1/session/{session_id}/risk")
    def handle_risk(session_id: str):
        try:
            with store.checkout(session_id) as session:
                return session.risk_export()
        except SessionNotFoundError:
            raise HTTPException(status_code=404, detail="Session not found")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store)}

    return app
