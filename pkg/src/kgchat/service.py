"""HTTP facade over the engine.

Turns within one conversation execute serially (a per-conversation lock);
different conversations may run concurrently. A client may attach a nonce
to a turn: retrying the same nonce returns the original response instead
of running the turn twice.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .nlu.segmentation import Hypothesis
from .pipeline import Engine, TurnRequest

_NONCE_CACHE_SIZE = 32


class CreateConversationBody(BaseModel):
    user_id: str = Field(min_length=1)


class HypothesisBody(BaseModel):
    text: str = Field(min_length=1)
    confidence: float = Field(default=1.0, gt=0.0, le=1.0)


class TurnBody(BaseModel):
    hypotheses: list[HypothesisBody] = Field(min_length=1)
    nonce: Optional[str] = None
    debug: bool = True


class ConversationGateway:
    """Serializes turns per conversation and deduplicates nonce retries."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._nonce_cache: dict[str, OrderedDict] = {}

    def _lock_for(self, conversation_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(conversation_id, threading.Lock())

    def run_turn(self, conversation_id: str, body: TurnBody) -> dict:
        with self._lock_for(conversation_id):
            cache = self._nonce_cache.setdefault(conversation_id, OrderedDict())
            if body.nonce is not None and body.nonce in cache:
                return cache[body.nonce]
            request = TurnRequest(hypotheses=tuple(
                Hypothesis(h.text, h.confidence) for h in body.hypotheses))
            response = self.engine.handle_turn(conversation_id, request)
            payload = {"conversation_id": conversation_id, "text": response.text}
            if body.debug:
                payload["debug"] = response.debug
            if body.nonce is not None:
                cache[body.nonce] = payload
                while len(cache) > _NONCE_CACHE_SIZE:
                    cache.popitem(last=False)
            return payload


def create_app(data_dir: Optional[Path] = None, store_dir: Optional[Path] = None,
               engine: Optional[Engine] = None) -> FastAPI:
    engine = engine or Engine(data_dir=data_dir, store_dir=store_dir)
    gateway = ConversationGateway(engine)
    app = FastAPI(title="kgchat", version="1.0")
    app.state.engine = engine

    @app.get("/api/health")
    def health():
        return {"status": "ok",
                "entities": len(engine.graph.entities),
                "properties": len(engine.graph.properties),
                "pairs": len(list(engine.pairs))}

    @app.post("/api/conversations", status_code=201)
    def create_conversation(body: CreateConversationBody):
        try:
            conversation_id = engine.create_conversation(body.user_id)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"conversation_id": conversation_id, "user_id": body.user_id}

    @app.get("/api/conversations/{conversation_id}")
    def get_conversation(conversation_id: str):
        state = engine.get_conversation(conversation_id)
        if state is None:
            raise HTTPException(status_code=404, detail="unknown conversation")
        return {
            "conversation_id": state.conversation_id,
            "user_id": state.user_id,
            "turns": state.turn_counter,
            "pending_question": state.pending_question,
            "transcript": state.transcript,
        }

    @app.post("/api/conversations/{conversation_id}/turns")
    def post_turn(conversation_id: str, body: TurnBody):
        if engine.get_conversation(conversation_id) is None:
            raise HTTPException(status_code=404, detail="unknown conversation")
        try:
            return gateway.run_turn(conversation_id, body)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/api/users/{user_id}/profile")
    def profile(user_id: str):
        return engine.user_profile(user_id)

    return app
