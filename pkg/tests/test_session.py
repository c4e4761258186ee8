from __future__ import annotations

import json

import pytest

from conftest import FIXED_TS, GOLDEN_DIR, StubResponder, ResponderProvider, make_engine
from plankit.errors import CorruptSession, SchemaMismatch, SessionLocked
from plankit.session import (
    SCHEMA_VERSION,
    AblationMode,
    SessionLock,
    create_session,
    load,
    replay,
    save,
    to_payload,
)


def small_session():
    """A session with a bit of everything: questions, children, drafts."""
    engine = make_engine(ResponderProvider(StubResponder()))
    engine.start("A goal", "its description", session_id="small")
    questions = engine.elicit_global_context()
    from plankit.curation_engine import ElicitationAnswer

    engine.commit_elicited(
        [
            ElicitationAnswer(questions[0].id, "an uploaded file body"),
            ElicitationAnswer(questions[1].id, ""),
        ]
    )
    children = engine.generate_subtasks(engine.session.tree.root)
    engine.detect_actionability(children[0])
    draft = engine.generate_draft(children[0], [])
    engine.save_draft(children[0], draft)
    engine.add_user_context("extra note", "remember this")
    return engine.session


class TestSaveLoad:
    def test_round_trip_identity(self, tmp_path):
        session = small_session()
        path = tmp_path / "s.json"
        save(session, path)
        loaded = load(path)
        assert to_payload(loaded) == to_payload(session)

    def test_save_twice_byte_identical(self, tmp_path):
        session = small_session()
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save(session, first)
        save(session, second)
        assert first.read_bytes() == second.read_bytes()

    def test_top_level_key_order(self, tmp_path):
        session = small_session()
        path = tmp_path / "s.json"
        save(session, path)
        document = json.loads(path.read_text(encoding="utf-8"))
        assert list(document.keys()) == [
            "id",
            "goal",
            "mode",
            "tree",
            "context",
            "drafts",
            "pending_questions",
            "events",
            "schema_version",
        ]
        assert document["schema_version"] == SCHEMA_VERSION
        node = next(iter(document["tree"]["nodes"].values()))
        assert list(node.keys()) == [
            "id",
            "title",
            "description",
            "estimated_duration",
            "status",
            "decomposition",
            "draft_ref",
            "parent",
            "children",
            "level",
        ]
        entry = document["context"][0]
        assert list(entry.keys()) == [
            "key",
            "value",
            "scope",
            "provenance",
            "source_node",
            "created_at",
        ]

    def test_unwritable_path(self, tmp_path):
        session = small_session()
        with pytest.raises(OSError):
            save(session, tmp_path / "missing-dir" / "s.json")

    def test_truncated_file(self, tmp_path):
        session = small_session()
        path = tmp_path / "s.json"
        save(session, path)
        path.write_text(path.read_text(encoding="utf-8")[: 100], encoding="utf-8")
        with pytest.raises(CorruptSession):
            load(path)

    def test_future_schema_rejected(self, tmp_path):
        session = small_session()
        path = tmp_path / "s.json"
        save(session, path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["schema_version"] = SCHEMA_VERSION + 1
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(SchemaMismatch):
            load(path)

    def test_dangling_draft_ref_rejected(self, tmp_path):
        session = small_session()
        path = tmp_path / "s.json"
        save(session, path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["context"] = [e for e in document["context"] if e["provenance"] != "saved_draft"]
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(CorruptSession):
            load(path)

    def test_non_object_document(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text("[1, 2, 3]", encoding="utf-8")
        with pytest.raises(CorruptSession):
            load(path)


class TestReplay:
    def test_replay_equals_materialized(self):
        session = small_session()
        rebuilt = replay(session.events)
        assert to_payload(rebuilt) == to_payload(session)

    def test_empty_events(self):
        with pytest.raises(CorruptSession):
            replay([])

    def test_must_start_with_goal(self):
        session = small_session()
        with pytest.raises(CorruptSession):
            replay(session.events[1:])

    def test_gap_detected(self):
        session = small_session()
        events = [e for e in session.events if e.seq != 3]
        with pytest.raises(CorruptSession):
            replay(events)

    def test_golden_walkthrough_replays(self):
        loaded = load(GOLDEN_DIR / "walkthrough_session.json")
        rebuilt = replay(loaded.events)
        assert to_payload(rebuilt) == to_payload(loaded)
        fork_parent = next(
            n for n in loaded.tree.walk() if n.title == "Reach Out to Potential Recommenders"
        )
        assert fork_parent.decomposition.value == "fork"
        assert len(fork_parent.children) == 3


class TestCreateSession:
    def test_goal_entry_created(self):
        session = create_session("s1", "Title", "Desc", AblationMode.FULL_CURATION, FIXED_TS)
        from plankit.context_store import Scope

        assert session.context.render_scope(Scope.GLOBAL) == "Goal: Title: Desc"
        assert session.goal == "Title"
        assert session.events[0].kind.value == "goal_set"

    def test_goal_without_description(self):
        session = create_session("s1", "Just title", "", AblationMode.REUSE_ONLY, FIXED_TS)
        from plankit.context_store import Scope

        assert session.context.render_scope(Scope.GLOBAL) == "Goal: Just title"


class TestSessionLock:
    def test_exclusive(self, tmp_path):
        path = tmp_path / "s.json"
        lock = SessionLock(path)
        lock.acquire()
        with pytest.raises(SessionLocked):
            SessionLock(path).acquire()
        lock.release()
        with SessionLock(path):
            pass
