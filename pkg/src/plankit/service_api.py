"""HTTP/JSON boundary over the curation engine and session store.

Error bodies are ``{"code", "message", "detail"}``; the code-to-status
mapping below is total over the domain error codes. Mutating requests are
serialized per session and rolled back to a pre-call snapshot on any domain
error, so a 4xx/5xx response never changes state.

Code -> status:
  400  bad_request, empty_goal, invalid_entry, empty_subtask_list,
       invalid_action, strategy_input_mismatch, malformed_suite, bad_config
  404  not_found, unknown_node, unknown_key, unknown_question
  409  conflict, already_decomposed, feature_disabled, no_valid_keys,
       no_entities_found, tree_limit_exceeded, session_locked
  502  unparseable_verdict, unparseable_subtasks
  503  provider_unavailable, provider_error, provider_http,
       provider_timeout, script_exhausted, script_mismatch
  500  everything else (internal invariant failures)
"""

from __future__ import annotations

import copy
import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import session as session_io
from .context_store import Scope
from .curation_engine import (
    AblationMode,
    CurationEngine,
    ElicitationAnswer,
    EngineConfig,
)
from .errors import PlanningError
from .llm_provider import ChatProvider
from .prompt_library import PromptLibrary

ERROR_STATUS = {
    "bad_request": 400,
    "empty_goal": 400,
    "invalid_entry": 400,
    "empty_subtask_list": 400,
    "invalid_action": 400,
    "strategy_input_mismatch": 400,
    "malformed_suite": 400,
    "bad_config": 400,
    "not_found": 404,
    "unknown_node": 404,
    "unknown_key": 404,
    "unknown_question": 404,
    "conflict": 409,
    "already_decomposed": 409,
    "feature_disabled": 409,
    "no_valid_keys": 409,
    "no_entities_found": 409,
    "tree_limit_exceeded": 409,
    "session_locked": 409,
    "unparseable_verdict": 502,
    "unparseable_subtasks": 502,
    "provider_unavailable": 503,
    "provider_error": 503,
    "provider_http": 503,
    "provider_timeout": 503,
    "script_exhausted": 503,
    "script_mismatch": 503,
}
DEFAULT_ERROR_STATUS = 500


class ApiError(PlanningError):
    """Raised by handlers for conditions that exist only at the HTTP layer."""

    def __init__(self, code: str, message: str, detail: dict | None = None) -> None:
        super().__init__(message)
        self.code = code
        self.detail = detail or {}


class CreateSessionBody(BaseModel):
    goal: str = ""
    description: str = ""
    mode: str = AblationMode.FULL_CURATION.value


class AnswerItem(BaseModel):
    question_id: str
    text: str = ""
    is_file: bool | None = None

    def to_answer(self) -> ElicitationAnswer:
        return ElicitationAnswer(question_id=self.question_id, text=self.text, is_file=self.is_file)


class AnswersBody(BaseModel):
    answers: list[AnswerItem] = []


class DecomposeBody(BaseModel):
    accepted_keys: list[str] | None = None


class SelectionBody(BaseModel):
    purpose: str = "drafting"


class DraftBody(BaseModel):
    action: str
    accepted_keys: list[str] | None = None
    instruction: str | None = None
    answers: list[AnswerItem] | None = None


class ContextBody(BaseModel):
    key: str = ""
    value: str = ""


class _Registry:
    """In-memory engines plus optional on-disk persistence, one lock each."""

    def __init__(
        self,
        provider: ChatProvider,
        config: EngineConfig,
        library: PromptLibrary | None,
        sessions_dir: Path | None,
        clock,
        timer,
    ) -> None:
        self.provider = provider
        self.config = config
        self.library = library
        self.sessions_dir = sessions_dir
        self.clock = clock
        self.timer = timer
        self._engines: dict[str, CurationEngine] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._file_locks: dict[str, session_io.SessionLock] = {}

    def _engine_config(self, mode: AblationMode) -> EngineConfig:
        return EngineConfig(
            mode=mode,
            strategy=self.config.strategy,
            template_params=dict(self.config.template_params),
        )

    def new_engine(self, mode: AblationMode) -> CurationEngine:
        return CurationEngine(
            self.provider,
            config=self._engine_config(mode),
            library=self.library,
            clock=self.clock,
            timer=self.timer,
        )

    def register(self, engine: CurationEngine) -> None:
        assert engine.session is not None
        session_id = engine.session.id
        with self._registry_lock:
            self._engines[session_id] = engine
            self._locks[session_id] = threading.Lock()
            if self.sessions_dir is not None:
                lock = session_io.SessionLock(self.sessions_dir / f"{session_id}.json")
                lock.acquire()
                self._file_locks[session_id] = lock
        self.persist(engine)

    def get(self, session_id: str) -> tuple[CurationEngine, threading.Lock]:
        with self._registry_lock:
            engine = self._engines.get(session_id)
            if engine is not None:
                return engine, self._locks[session_id]
        # Fall back to disk so a restarted service can resume sessions.
        if self.sessions_dir is not None:
            path = self.sessions_dir / f"{session_id}.json"
            if path.exists():
                loaded = session_io.load(path)
                engine = CurationEngine(
                    self.provider,
                    config=self._engine_config(loaded.mode),
                    library=self.library,
                    session=loaded,
                    clock=self.clock,
                    timer=self.timer,
                )
                with self._registry_lock:
                    self._engines[session_id] = engine
                    self._locks[session_id] = threading.Lock()
                return engine, self._locks[session_id]
        raise ApiError("not_found", f"unknown session {session_id!r}")

    def persist(self, engine: CurationEngine) -> None:
        if self.sessions_dir is not None and engine.session is not None:
            session_io.save(engine.session, self.sessions_dir / f"{engine.session.id}.json")

    def shutdown(self) -> None:
        with self._registry_lock:
            for lock in self._file_locks.values():
                lock.release()
            self._file_locks.clear()


def create_app(
    provider: ChatProvider,
    sessions_dir: Path | str | None = None,
    config: EngineConfig | None = None,
    library: PromptLibrary | None = None,
    clock=None,
    timer=None,
) -> FastAPI:
    directory = Path(sessions_dir) if sessions_dir is not None else None
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
    registry = _Registry(
        provider=provider,
        config=config or EngineConfig(),
        library=library,
        sessions_dir=directory,
        clock=clock,
        timer=timer,
    )

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        registry.shutdown()

    app = FastAPI(title="plankit", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.registry = registry

    @app.exception_handler(PlanningError)
    async def planning_error_handler(_: Request, exc: PlanningError) -> JSONResponse:
        status = ERROR_STATUS.get(exc.code, DEFAULT_ERROR_STATUS)
        detail = getattr(exc, "detail", None)
        if not isinstance(detail, dict):
            detail = {}
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": str(exc), "detail": detail},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": "invalid request body", "detail": {}},
        )

    def mutate(session_id: str, fn):
        """Run a mutating engine call under the session lock; roll the session
        back to the pre-call snapshot if it raises."""
        engine, lock = registry.get(session_id)
        with lock:
            snapshot = copy.deepcopy(engine.session)
            try:
                result = fn(engine)
            except PlanningError:
                engine.session = snapshot
                raise
            registry.persist(engine)
            return result

    def read(session_id: str):
        engine, _ = registry.get(session_id)
        return engine

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            mode = AblationMode(body.mode)
        except ValueError:
            raise ApiError("bad_request", f"unknown mode {body.mode!r}") from None
        engine = registry.new_engine(mode)
        engine.start(body.goal, body.description)
        questions = []
        if mode is AblationMode.FULL_CURATION:
            questions = engine.elicit_global_context()
        registry.register(engine)
        return {
            "session_id": engine.session.id,
            "questions": [q.to_dict() for q in questions],
        }

    @app.post("/sessions/{session_id}/answers")
    def commit_answers(session_id: str, body: AnswersBody):
        keys = mutate(
            session_id,
            lambda engine: engine.commit_elicited([a.to_answer() for a in body.answers]),
        )
        return {"global_context_keys": keys}

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        return read(session_id).session.tree.to_dict()

    @app.post("/sessions/{session_id}/nodes/{node_id}/detect")
    def detect(session_id: str, node_id: str):
        def run(engine: CurationEngine):
            detection = engine.detect_actionability(node_id)
            should_fork = False
            reasoning = detection.reasoning
            if detection.needs_decomposition:
                fork = engine.detect_fork(node_id)
                should_fork = fork.should_fork
                if fork.reasoning:
                    reasoning = f"{reasoning}\n{fork.reasoning}" if reasoning else fork.reasoning
            return {
                "needs_decomposition": detection.needs_decomposition,
                "should_fork": should_fork,
                "reasoning": reasoning,
            }

        return mutate(session_id, run)

    @app.post("/sessions/{session_id}/nodes/{node_id}/decompose")
    def decompose(session_id: str, node_id: str, body: DecomposeBody):
        def run(engine: CurationEngine):
            fork_decision = engine.last_fork_decision(node_id)
            if body.accepted_keys and fork_decision and fork_decision["should_fork"]:
                ids = engine.fork_task(node_id, body.accepted_keys)
            else:
                ids = engine.generate_subtasks(node_id)
            tree = engine.session.tree
            return {"children": [tree.node(child).to_dict() for child in ids]}

        return mutate(session_id, run)

    @app.post("/sessions/{session_id}/nodes/{node_id}/context-selection")
    def context_selection(session_id: str, node_id: str, body: SelectionBody):
        candidates = mutate(
            session_id, lambda engine: engine.select_context(node_id, body.purpose)
        )
        return {"candidates": [c.to_dict() for c in candidates]}

    @app.post("/sessions/{session_id}/nodes/{node_id}/draft")
    def draft(session_id: str, node_id: str, body: DraftBody):
        def run(engine: CurationEngine):
            action = body.action
            if action in ("generate", "regenerate"):
                candidate = engine.generate_draft(node_id, body.accepted_keys or [])
                return {"draft": candidate.to_dict()}
            latest = engine.session.latest_draft(node_id)
            if action == "elicit_and_regenerate":
                if body.answers is None:
                    if latest is None:
                        raise ApiError(
                            "conflict", f"node {node_id!r} has no draft to improve"
                        )
                    questions = engine.elicit_draft_context(node_id, latest)
                    return {"questions": [q.to_dict() for q in questions]}
                candidate = engine.regenerate_with_answers(
                    node_id, [a.to_answer() for a in body.answers]
                )
                return {"draft": candidate.to_dict()}
            if latest is None:
                raise ApiError("conflict", f"node {node_id!r} has no draft yet")
            if action == "iterate":
                candidate = engine.iterate_draft(node_id, latest, body.instruction or "")
                return {"draft": candidate.to_dict()}
            if action == "save":
                key = engine.save_draft(node_id, latest)
                return {"saved_key": key}
            raise ApiError("bad_request", f"unknown draft action {action!r}")

        return mutate(session_id, run)

    @app.get("/sessions/{session_id}/context")
    def get_context(session_id: str, scope: str = ""):
        try:
            parsed = Scope(scope)
        except ValueError:
            raise ApiError("bad_request", f"scope must be 'global' or 'local', got {scope!r}") from None
        engine = read(session_id)
        return {"entries": [info.to_dict() for info in engine.session.context.list_keys(parsed)]}

    @app.post("/sessions/{session_id}/context")
    def add_context(session_id: str, body: ContextBody):
        key = mutate(session_id, lambda engine: engine.add_user_context(body.key, body.value))
        return {"key": key}

    return app
