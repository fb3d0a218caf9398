"""HTTP session service for interactive elicitation.

Endpoints (JSON in/out, shared problem/configuration document formats):

    POST /sessions                  create from a problem document; returns
                                    the initial triple to rank
    POST /sessions/{id}/ranking     submit the ranked triple; returns the
                                    first query pair and recommendation
    POST /sessions/{id}/answer      answer "first"/"second"; returns the next
                                    query pair and current recommendation
    GET  /sessions/{id}/model       nonzero features sorted by |weight|
    POST /sessions/{id}/accept      close the session with the recommendation

Sessions live in memory; every action appends to a JSON-lines event log, and
a restarted service rebuilds sessions by replaying those logs (sessions are
deterministic given seed and answers). Access to one session is serialized:
a concurrent mutation gets 409.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .core import StructureError, configuration_from_json, configuration_to_json
from .dmsim import skeleton_from_json
from .elicit import (
    EventLog,
    ProtocolError,
    SessionConfig,
    SessionState,
    SetupError,
    Status,
    init_session,
)


@dataclass
class SessionRecord:
    session_id: str
    state: SessionState
    problem_doc: dict
    options: dict
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _advance(state: SessionState) -> dict:
    """Refine, surface the recommendation, and issue the next query pair."""
    recommendation = state.refine_and_recommend()
    state.generate_second()
    pair = state.pending_pair
    return {
        "recommendation": configuration_to_json(recommendation),
        "query": {
            "first": configuration_to_json(pair.first),
            "second": configuration_to_json(pair.second),
        },
        "answered": state.iteration,
    }


def _session_config(options: dict) -> SessionConfig:
    return SessionConfig(degree=int(options.get("d", 3)))


def replay_session(problem_doc: dict, options: dict, events: list[dict], log: EventLog) -> SessionState:
    """Deterministically rebuild a session from its recorded actions."""
    skeleton = skeleton_from_json(problem_doc)
    state = init_session(skeleton, _session_config(options), int(options.get("seed", 0)), log)
    for ev in events:
        if ev["type"] == "api_ranking":
            order = [configuration_from_json(c, skeleton.attributes) for c in ev["order"]]
            state.record_initial_ranking(order)
            _advance(state)
        elif ev["type"] == "api_answer":
            state.record_answer(ev["preferred"])
            _advance(state)
        elif ev["type"] == "api_accept":
            state.accept()
    return state


def create_app(log_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="cleo session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, SessionRecord] = {}
    app.state.sessions = sessions
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        for name in sorted(os.listdir(log_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(log_dir, name)
            with open(path, "r", encoding="utf-8") as fh:
                events = [json.loads(line) for line in fh if line.strip()]
            created = next((e for e in events if e["type"] == "api_created"), None)
            if created is None:
                continue
            session_id = created["session_id"]
            # replay appends to a scratch log; the on-disk history is the truth
            state = replay_session(
                created["problem"], created["options"], events, EventLog(None)
            )
            state.log = EventLog(path)
            sessions[session_id] = SessionRecord(
                session_id, state, created["problem"], created["options"]
            )

    def _get(session_id: str) -> SessionRecord:
        rec = sessions.get(session_id)
        if rec is None:
            raise HTTPException(404, "unknown session id")
        return rec

    def _locked(rec: SessionRecord):
        if not rec.lock.acquire(blocking=False):
            raise HTTPException(409, "session is busy with another request")
        return rec.lock

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        problem_doc = payload.get("problem")
        options = payload.get("options", {}) or {}
        if not isinstance(problem_doc, dict):
            raise HTTPException(400, "body needs a 'problem' document")
        try:
            skeleton = skeleton_from_json(problem_doc)
            if not skeleton.attributes:
                raise StructureError("a problem needs at least one attribute")
        except (StructureError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed problem: {exc}")
        session_id = uuid.uuid4().hex
        log_path = os.path.join(log_dir, f"{session_id}.jsonl") if log_dir else None
        log = EventLog(log_path)
        log.append(
            {
                "type": "api_created",
                "session_id": session_id,
                "problem": problem_doc,
                "options": options,
            }
        )
        try:
            state = init_session(
                skeleton, _session_config(options), int(options.get("seed", 0)), log
            )
        except SetupError as exc:
            raise HTTPException(422, f"infeasible hard constraints: {exc}")
        sessions[session_id] = SessionRecord(session_id, state, problem_doc, options)
        return {
            "session_id": session_id,
            "initial_triple": [configuration_to_json(c) for c in state.pending_triple],
        }

    @app.post("/sessions/{session_id}/ranking")
    def submit_ranking(session_id: str, payload: dict = Body(...)):
        rec = _get(session_id)
        lock = _locked(rec)
        try:
            order_doc = payload.get("order")
            if not isinstance(order_doc, list) or len(order_doc) != 3:
                raise HTTPException(400, "body needs an 'order' list of three configurations")
            if rec.state.status != Status.AWAITING_INITIAL_RANKING:
                raise HTTPException(409, f"session is {rec.state.status.value}")
            try:
                order = [
                    configuration_from_json(c, rec.state.skeleton.attributes) for c in order_doc
                ]
                rec.state.record_initial_ranking(order)
            except (StructureError, ProtocolError, KeyError, TypeError, ValueError) as exc:
                raise HTTPException(400, f"bad ranking: {exc}")
            rec.state.log.append({"type": "api_ranking", "order": order_doc})
            return _advance(rec.state)
        finally:
            lock.release()

    @app.post("/sessions/{session_id}/answer")
    def submit_answer(session_id: str, payload: dict = Body(...)):
        rec = _get(session_id)
        lock = _locked(rec)
        try:
            preferred = payload.get("preferred")
            if preferred not in ("first", "second"):
                raise HTTPException(400, "preferred must be 'first' or 'second'")
            if rec.state.status != Status.AWAITING_PAIR_ANSWER:
                raise HTTPException(409, f"session is {rec.state.status.value}")
            rec.state.record_answer(preferred)
            rec.state.log.append({"type": "api_answer", "preferred": preferred})
            return _advance(rec.state)
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str):
        rec = _get(session_id)
        if rec.state.model is None:
            raise HTTPException(409, "no refinement has run yet")
        return rec.state.model.dump()

    @app.post("/sessions/{session_id}/accept")
    def accept_session(session_id: str):
        rec = _get(session_id)
        lock = _locked(rec)
        try:
            if rec.state.status not in (Status.RECOMMENDED, Status.AWAITING_PAIR_ANSWER):
                raise HTTPException(409, f"session is {rec.state.status.value}")
            final = rec.state.accept()
            rec.state.log.append({"type": "api_accept"})
            return {"final": configuration_to_json(final)}
        finally:
            lock.release()

    return app
