"""HTTP session service: JSON API over the diagnostic engine.

Sessions are persisted as append-only transcripts (one JSONL file per
session: a header line, then one line per answer); because sessions replay
deterministically, restarting the service rebuilds every session's state
exactly. Per-session answers are serialized with a lock; distinct sessions
are independent.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .errors import (
    AlreadyObservedError,
    ConfigError,
    SessionNotInProgressError,
    UnknownIdError,
)
from .kb import (
    KnowledgeBase,
    check_document,
    hard_violations,
    kb_to_document,
    load_kb_path,
    serialize_kb,
)
from .session import (
    SessionConfig,
    SessionState,
    replay_transcript,
    start_session,
    submit_answer,
    summary,
    what_if,
)

DEFAULT_PORT = 8756


@dataclass
class ServiceConfig:
    kb_dir: Path
    session_store: Path
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    max_sessions: int = 256

    def __post_init__(self):
        self.kb_dir = Path(self.kb_dir)
        self.session_store = Path(self.session_store)


class SessionStore:
    """Append-only transcript files, one per session."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.jsonl"

    def record_start(self, session_id: str, kb_name: str, config: SessionConfig) -> None:
        header = {"kb": kb_name, "config": config.to_dict()}
        with open(self._path(session_id), "w") as fh:
            fh.write(json.dumps(header) + "\n")

    def record_answer(self, session_id: str, symptom: str, finding: str) -> None:
        with open(self._path(session_id), "a") as fh:
            fh.write(json.dumps({"symptom": symptom, "finding": finding}) + "\n")

    def load_all(self) -> list[tuple[str, str, dict, list[tuple[str, str]]]]:
        stored = []
        for path in sorted(self.directory.glob("*.jsonl")):
            lines = [json.loads(line) for line in path.read_text().splitlines() if line]
            if not lines:
                continue
            header, answers = lines[0], lines[1:]
            stored.append(
                (
                    path.stem,
                    header["kb"],
                    header.get("config") or {},
                    [(a["symptom"], a["finding"]) for a in answers],
                )
            )
        return stored


def load_kb_dir(kb_dir: Path) -> dict[str, KnowledgeBase]:
    """Load every *.json KB in the directory; any invalid KB aborts startup."""
    kbs: dict[str, KnowledgeBase] = {}
    for path in sorted(Path(kb_dir).glob("*.json")):
        kbs[path.stem] = load_kb_path(path)
    return kbs


class CreateSessionRequest(BaseModel):
    kb: str
    config: dict | None = None


class AnswerRequest(BaseModel):
    symptom: str
    finding: str


@dataclass
class _Registry:
    kbs: dict[str, KnowledgeBase]
    store: SessionStore
    max_sessions: int
    sessions: dict[str, SessionState] = dataclass_field(default_factory=dict)
    kb_names: dict[str, str] = dataclass_field(default_factory=dict)
    locks: dict[str, threading.Lock] = dataclass_field(default_factory=dict)
    registry_lock: threading.Lock = dataclass_field(default_factory=threading.Lock)


def session_view(session_id: str, kb_name: str, state: SessionState) -> dict:
    next_question = None
    if state.next is not None:
        node = state.kb.symptom(state.next)
        next_question = {"symptom": node.id, "question": node.question}
    return {
        "id": session_id,
        "kb": kb_name,
        "status": state.status.value,
        "next_question": next_question,
        "candidates": [h.to_dict() for h in state.candidates],
        "observations": {s: f.value for s, f in state.observations.items()},
        "transcript": [{"symptom": s, "finding": f.value} for s, f in state.transcript],
    }


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the service app; replays stored transcripts for recovery."""
    registry = _Registry(
        kbs=load_kb_dir(config.kb_dir),
        store=SessionStore(config.session_store),
        max_sessions=config.max_sessions,
    )
    _recover_sessions(registry)

    app = FastAPI(title="coverdx session service")
    # The browser console is served as static files from elsewhere; the API
    # has no authentication, so a permissive CORS policy costs nothing.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.registry = registry

    def get_session(session_id: str) -> SessionState:
        state = registry.sessions.get(session_id)
        if state is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return state

    @app.put("/kb/{name}")
    def put_kb(name: str, document: dict = Body(...)):
        if not name.replace("-", "").replace("_", "").isalnum():
            raise HTTPException(422, "kb name must be alphanumeric with - or _")
        kb, violations = check_document(json.dumps(document))
        if kb is None:
            raise HTTPException(
                422, {"violations": [str(v) for v in hard_violations(violations)]}
            )
        (config.kb_dir / f"{name}.json").write_text(serialize_kb(kb))
        registry.kbs[name] = kb
        return {"name": name, "warnings": [str(v) for v in violations]}

    @app.get("/kb/{name}")
    def get_kb(name: str):
        kb = registry.kbs.get(name)
        if kb is None:
            raise HTTPException(404, f"unknown kb {name}")
        return kb_to_document(kb)

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest):
        kb = registry.kbs.get(request.kb)
        if kb is None:
            raise HTTPException(404, f"unknown kb {request.kb}")
        try:
            session_config = SessionConfig.from_dict(request.config or {})
        except (ConfigError, ValueError, TypeError) as exc:
            raise HTTPException(422, f"bad session config: {exc}")
        with registry.registry_lock:
            if len(registry.sessions) >= registry.max_sessions:
                raise HTTPException(429, "session capacity reached")
            session_id = uuid.uuid4().hex[:12]
            state = start_session(kb, session_config)
            registry.sessions[session_id] = state
            registry.kb_names[session_id] = request.kb
            registry.locks[session_id] = threading.Lock()
        registry.store.record_start(session_id, request.kb, session_config)
        return session_view(session_id, request.kb, state)

    @app.get("/sessions/{session_id}")
    def get_session_view(session_id: str):
        state = get_session(session_id)
        return session_view(session_id, registry.kb_names[session_id], state)

    @app.post("/sessions/{session_id}/answers")
    def post_answer(session_id: str, request: AnswerRequest):
        get_session(session_id)
        with registry.locks[session_id]:
            state = registry.sessions[session_id]
            new_state = _apply_answer(state, request)
            registry.sessions[session_id] = new_state
            registry.store.record_answer(session_id, request.symptom, request.finding)
        return session_view(session_id, registry.kb_names[session_id], new_state)

    @app.post("/sessions/{session_id}/whatif")
    def post_whatif(session_id: str, request: AnswerRequest):
        state = get_session(session_id)
        preview = _apply_answer(state, request, preview=True)
        return session_view(session_id, registry.kb_names[session_id], preview)

    @app.get("/sessions/{session_id}/summary")
    def get_summary(session_id: str):
        return summary(get_session(session_id)).to_dict()

    return app


def _apply_answer(state: SessionState, request: AnswerRequest, preview: bool = False) -> SessionState:
    transition = what_if if preview else submit_answer
    try:
        return transition(state, request.symptom, request.finding)
    except (AlreadyObservedError, SessionNotInProgressError) as exc:
        raise HTTPException(409, str(exc))
    except (UnknownIdError, ValueError) as exc:
        raise HTTPException(422, str(exc))


def _recover_sessions(registry: _Registry) -> None:
    for session_id, kb_name, config_doc, answers in registry.store.load_all():
        kb = registry.kbs.get(kb_name)
        if kb is None:
            continue  # KB removed since; leave the transcript on disk untouched
        state = replay_transcript(kb, SessionConfig.from_dict(config_doc), answers)
        registry.sessions[session_id] = state
        registry.kb_names[session_id] = kb_name
        registry.locks[session_id] = threading.Lock()


def serve(config: ServiceConfig) -> None:
    """Validate the KB directory and run the service until shutdown.

    Refuses to start when the directory has no valid KB; an invalid KB
    aborts with its violation list (raised by the loader).
    """
    import uvicorn

    if not any(Path(config.kb_dir).glob("*.json")):
        raise ConfigError(f"no KB documents found in {config.kb_dir}")
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
