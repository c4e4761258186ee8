"""Durable, replayable planning state.

The append-only event log is the authoritative record; the materialized
fields (tree, context, drafts, pending questions) are a cache rebuilt by
``replay``. Engine operations construct an event and then apply it through
the same reducer replay uses, so the two can never drift.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Sequence

from .context_store import ContextEntry, ContextStore, Provenance, Scope
from .errors import CorruptSession, InvalidTree, PlanningError, SchemaMismatch, SessionLocked
from .task_graph import Decomposition, SubtaskSpec, TaskTree

SCHEMA_VERSION = 1
GOAL_CONTEXT_KEY = "Goal"


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class AblationMode(str, Enum):
    """Which curation mechanisms are active.

    Draft reuse is always on; selection and elicitation switch on one at a
    time, matching the study conditions the engine can be run under.
    """

    REUSE_ONLY = "reuse_only"
    SELECTION_AND_REUSE = "selection_and_reuse"
    FULL_CURATION = "full_curation"


class EventKind(str, Enum):
    GOAL_SET = "goal_set"
    QUESTIONS_GENERATED = "questions_generated"
    ANSWER_COMMITTED = "answer_committed"
    SUBTASKS_ATTACHED = "subtasks_attached"
    DETECTION = "detection"
    FORK_DECISION = "fork_decision"
    CONTEXT_SELECTED = "context_selected"
    DRAFT_GENERATED = "draft_generated"
    DRAFT_SAVED = "draft_saved"
    PROVIDER_CALL = "provider_call"
    WARNING = "warning"


class DraftLineage(str, Enum):
    INITIAL = "initial"
    REGENERATED = "regenerated"
    REGENERATED_WITH_CONTEXT = "regenerated_with_context"
    ITERATED = "iterated"


@dataclass
class SessionEvent:
    seq: int
    kind: EventKind
    payload: dict
    at: str

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind.value, "payload": self.payload, "at": self.at}

    @classmethod
    def from_dict(cls, data: dict) -> "SessionEvent":
        return cls(
            seq=data["seq"],
            kind=EventKind(data["kind"]),
            payload=data["payload"],
            at=data["at"],
        )


@dataclass
class ElicitationQuestion:
    id: str
    question: str
    expects_file: bool = False
    answer: str | None = None
    answered: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "expects_file": self.expects_file,
            "answer": self.answer,
            "answered": self.answered,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ElicitationQuestion":
        return cls(
            id=data["id"],
            question=data["question"],
            expects_file=data["expects_file"],
            answer=data["answer"],
            answered=data["answered"],
        )


@dataclass
class DraftCandidate:
    node: str
    content: str
    context_keys_used: list[str]
    revision: int
    lineage: DraftLineage

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "content": self.content,
            "context_keys_used": list(self.context_keys_used),
            "revision": self.revision,
            "lineage": self.lineage.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DraftCandidate":
        return cls(
            node=data["node"],
            content=data["content"],
            context_keys_used=list(data["context_keys_used"]),
            revision=data["revision"],
            lineage=DraftLineage(data["lineage"]),
        )


@dataclass
class Session:
    id: str
    goal: str
    mode: AblationMode
    tree: TaskTree
    context: ContextStore
    drafts: dict[str, list[DraftCandidate]] = field(default_factory=dict)
    pending_questions: list[ElicitationQuestion] = field(default_factory=list)
    events: list[SessionEvent] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def next_seq(self) -> int:
        return self.events[-1].seq + 1 if self.events else 1

    def latest_draft(self, node_id: str) -> DraftCandidate | None:
        candidates = self.drafts.get(node_id)
        return candidates[-1] if candidates else None


# --- event reducer -------------------------------------------------------------


def session_from_goal_event(event: SessionEvent) -> Session:
    """Build the initial session state from a goal_set event."""
    payload = event.payload
    tree = TaskTree.create(
        payload["goal_title"], payload.get("goal_description", ""), created_at=event.at
    )
    context = ContextStore()
    title = payload["goal_title"]
    description = payload.get("goal_description", "")
    context.put(
        ContextEntry(
            key=GOAL_CONTEXT_KEY,
            value=f"{title}: {description}" if description else title,
            scope=Scope.GLOBAL,
            provenance=Provenance.GOAL_STATEMENT,
            created_at=event.at,
        )
    )
    return Session(
        id=payload["session_id"],
        goal=title,
        mode=AblationMode(payload["mode"]),
        tree=tree,
        context=context,
    )


def apply_event(session: Session, event: SessionEvent) -> None:
    """Apply one event's state effect. goal_set is handled at construction;
    provider_call and warning carry no state."""
    kind = event.kind
    payload = event.payload

    if kind is EventKind.QUESTIONS_GENERATED:
        session.pending_questions = [
            ElicitationQuestion(
                id=q["id"], question=q["question"], expects_file=q["expects_file"]
            )
            for q in payload["questions"]
        ]
    elif kind is EventKind.ANSWER_COMMITTED:
        question_id = payload.get("question_id")
        if payload.get("skipped"):
            _mark_answered(session, question_id, "skipped")
            return
        session.context.put(
            ContextEntry(
                key=payload["key"],
                value=payload["value"],
                scope=Scope(payload["scope"]),
                provenance=Provenance(payload["provenance"]),
                source_node=payload.get("source_node"),
                created_at=event.at,
            )
        )
        if question_id is not None:
            _mark_answered(session, question_id, payload["value"])
    elif kind is EventKind.SUBTASKS_ATTACHED:
        children = payload["children"]
        session.tree.attach_subtasks(
            parent=payload["parent"],
            subtasks=[
                SubtaskSpec(
                    title=c["title"],
                    description=c["description"],
                    estimated_duration=c["estimated_duration"],
                )
                for c in children
            ],
            kind=Decomposition(payload["kind"]),
            ids=[c["id"] for c in children],
        )
    elif kind is EventKind.DETECTION:
        session.tree.mark_exploring(payload["node"])
    elif kind is EventKind.DRAFT_GENERATED:
        candidate = DraftCandidate(
            node=payload["node"],
            content=payload["content"],
            context_keys_used=list(payload["context_keys_used"]),
            revision=payload["revision"],
            lineage=DraftLineage(payload["lineage"]),
        )
        session.drafts.setdefault(candidate.node, []).append(candidate)
    elif kind is EventKind.DRAFT_SAVED:
        node_id = payload["node"]
        revision = payload["revision"]
        candidates = session.drafts.get(node_id, [])
        candidate = next((c for c in candidates if c.revision == revision), None)
        if candidate is None:
            raise CorruptSession(f"draft_saved references unknown revision {revision} of {node_id}")
        session.context.put(
            ContextEntry(
                key=payload["key"],
                value=candidate.content,
                scope=Scope.LOCAL,
                provenance=Provenance.SAVED_DRAFT,
                source_node=node_id,
                created_at=event.at,
            )
        )
        session.tree.set_draft_ref(node_id, payload["key"])
    elif kind in (EventKind.GOAL_SET, EventKind.FORK_DECISION, EventKind.CONTEXT_SELECTED,
                  EventKind.PROVIDER_CALL, EventKind.WARNING):
        pass
    else:  # pragma: no cover - enum is closed
        raise CorruptSession(f"unknown event kind {kind!r}")


def _mark_answered(session: Session, question_id: str | None, answer: str) -> None:
    for question in session.pending_questions:
        if question.id == question_id:
            question.answer = answer
            question.answered = True
            return


def create_session(
    session_id: str,
    goal_title: str,
    goal_description: str,
    mode: AblationMode,
    at: str,
) -> Session:
    event = SessionEvent(
        seq=1,
        kind=EventKind.GOAL_SET,
        payload={
            "session_id": session_id,
            "goal_title": goal_title,
            "goal_description": goal_description,
            "mode": mode.value,
        },
        at=at,
    )
    session = session_from_goal_event(event)
    session.events.append(event)
    return session


def record_event(session: Session, kind: EventKind, payload: dict, at: str) -> SessionEvent:
    """Append an event and apply its state effect."""
    event = SessionEvent(seq=session.next_seq(), kind=kind, payload=payload, at=at)
    session.events.append(event)
    apply_event(session, event)
    return event


def replay(events: Sequence[SessionEvent]) -> Session:
    """Rebuild a session purely from its event log."""
    if not events:
        raise CorruptSession("event list is empty")
    if events[0].kind is not EventKind.GOAL_SET:
        raise CorruptSession("event log must start with goal_set")
    for index, event in enumerate(events):
        if event.seq != index + 1:
            raise CorruptSession(f"event seq gap at position {index} (seq {event.seq})")
    try:
        session = session_from_goal_event(events[0])
    except (KeyError, ValueError, PlanningError) as exc:
        raise CorruptSession(f"bad goal_set payload: {exc}") from exc
    session.events.append(events[0])
    for event in events[1:]:
        session.events.append(event)
        try:
            apply_event(session, event)
        except CorruptSession:
            raise
        except (KeyError, ValueError, PlanningError) as exc:
            raise CorruptSession(f"event {event.seq} ({event.kind.value}) failed: {exc}") from exc
    return session


# --- serialization --------------------------------------------------------------


def to_payload(session: Session) -> dict:
    return {
        "id": session.id,
        "goal": session.goal,
        "mode": session.mode.value,
        "tree": session.tree.to_dict(),
        "context": session.context.to_list(),
        "drafts": {node: [c.to_dict() for c in cs] for node, cs in session.drafts.items()},
        "pending_questions": [q.to_dict() for q in session.pending_questions],
        "events": [e.to_dict() for e in session.events],
        "schema_version": session.schema_version,
    }


def from_payload(payload: dict) -> Session:
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
    try:
        session = Session(
            id=payload["id"],
            goal=payload["goal"],
            mode=AblationMode(payload["mode"]),
            tree=TaskTree.from_dict(payload["tree"]),
            context=ContextStore.from_list(payload["context"]),
            drafts={
                node: [DraftCandidate.from_dict(c) for c in cs]
                for node, cs in payload["drafts"].items()
            },
            pending_questions=[
                ElicitationQuestion.from_dict(q) for q in payload["pending_questions"]
            ],
            events=[SessionEvent.from_dict(e) for e in payload["events"]],
            schema_version=version,
        )
    except SchemaMismatch:
        raise
    except (KeyError, ValueError, TypeError, InvalidTree) as exc:
        raise CorruptSession(str(exc)) from exc
    verify_session(session)
    return session


def verify_session(session: Session) -> None:
    """Cross-invariant sweep used on load and after replay."""
    session.tree.validate()
    for index, event in enumerate(session.events):
        if event.seq != index + 1:
            raise CorruptSession(f"event seq gap at position {index}")
    for node in session.tree.nodes.values():
        if node.draft_ref is not None and not session.context.has(Scope.LOCAL, node.draft_ref):
            raise CorruptSession(f"draft_ref {node.draft_ref!r} has no local context entry")
    for entry in session.context.list_keys(Scope.LOCAL):
        if entry.provenance is Provenance.SAVED_DRAFT and entry.source_node not in session.tree:
            raise CorruptSession(f"saved draft {entry.key!r} references unknown node")
    for node_id, candidates in session.drafts.items():
        if node_id not in session.tree:
            raise CorruptSession(f"drafts reference unknown node {node_id!r}")
        for index, candidate in enumerate(candidates):
            if candidate.revision != index + 1:
                raise CorruptSession(f"draft revisions for {node_id!r} are not sequential")


def save(session: Session, path: Path | str) -> None:
    """Write the session as a single stable-ordered JSON document."""
    path = Path(path)
    text = json.dumps(to_payload(session), ensure_ascii=False, indent=2) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def load(path: Path | str) -> Session:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptSession(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptSession("session document must be a JSON object")
    return from_payload(payload)


class SessionLock:
    """Advisory writer lock: a sidecar .lock file created exclusively."""

    def __init__(self, session_path: Path | str) -> None:
        self.lock_path = Path(str(session_path) + ".lock")
        self._held = False

    def acquire(self) -> None:
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise SessionLocked(f"{self.lock_path} is held by another writer") from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        self._held = True

    def release(self) -> None:
        if self._held:
            self.lock_path.unlink(missing_ok=True)
            self._held = False

    def __enter__(self) -> "SessionLock":
        self.acquire()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.release()
