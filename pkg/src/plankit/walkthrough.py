"""Scripted end-to-end planning session against the deterministic mock.

Drives the full PhD-application scenario: goal elicitation, standard
decomposition, entity forking (universities, then recommenders), drafting
with context selection, draft-iteration elicitation, and saved drafts. The
run is fully offline and reproducible: a fixed clock, a scripted provider,
and a fixed session id give a byte-stable session file.
"""

from __future__ import annotations

from pathlib import Path

from .curation_engine import CurationEngine, ElicitationAnswer, EngineConfig
from .errors import CorruptSession, ScriptMismatch
from .llm_provider import MockProvider, ProviderScript
from .session import AblationMode, Session, replay, save, to_payload
from .task_graph import TaskTree

DEFAULT_SCRIPT_PATH = Path(__file__).parent / "data" / "walkthrough_script.json"

SESSION_ID = "walkthrough"
FIXED_TIMESTAMP = "2025-01-01T00:00:00Z"

GOAL_TITLE = "Apply for a PhD in NLP"
GOAL_DESCRIPTION = "Get admitted to a PhD program in natural language processing."

CV_TEXT = (
    "John Doe — CV. Research assistant in the university NLP lab. Co-authored a "
    "2023 paper on multilingual parsing with Prof. Blake White. Teaching "
    "assistant for Introduction to Computational Linguistics under Prof. Julian "
    "Deng. Summer internship on dialogue systems mentored by Dr. Alice Feng."
)

MIDWEST_INSTRUCTION = "I want schools in the Midwest of the US."
COLLABORATION_ANSWER = "We co-authored the 2023 paper on multilingual parsing."

RECOMMENDER_NAMES = ("Prof. Blake White", "Prof. Julian Deng", "Dr. Alice Feng")


def _expect(condition: bool, detail: str) -> None:
    if not condition:
        raise CorruptSession(f"walkthrough expectation failed: {detail}")


def _node_by_title(tree: TaskTree, title: str) -> str:
    for node in tree.walk():
        if node.title == title:
            return node.id
    raise CorruptSession(f"walkthrough expectation failed: no node titled {title!r}")


def run_walkthrough(
    script_path: Path | str = DEFAULT_SCRIPT_PATH,
    out_path: Path | str | None = None,
) -> Session:
    """Run the scenario; returns the finished session (and writes it when
    ``out_path`` is given). Raises on any invariant or script deviation."""
    script = ProviderScript.from_file(script_path)
    provider = MockProvider(script)
    engine = CurationEngine(
        provider,
        config=EngineConfig(mode=AblationMode.FULL_CURATION),
        clock=lambda: FIXED_TIMESTAMP,
        timer=lambda: 0.0,
    )
    session = engine.start(GOAL_TITLE, GOAL_DESCRIPTION, session_id=SESSION_ID)
    tree = session.tree

    # Goal-level elicitation: upload the CV, skip the rest.
    questions = engine.elicit_global_context()
    _expect(len(questions) >= 1, "elicitation produced no questions")
    _expect(questions[0].expects_file, "first elicitation question should request a file")
    answers = [ElicitationAnswer(questions[0].id, CV_TEXT, is_file=True)]
    answers += [ElicitationAnswer(q.id, "") for q in questions[1:]]
    engine.commit_elicited(answers)

    # Initial plan under the goal.
    engine.generate_subtasks(tree.root)

    # First subtask is too broad: decompose it (no fork, nothing saved yet).
    programs = _node_by_title(tree, "Identify Potential PhD Programs")
    detection = engine.detect_actionability(programs)
    _expect(detection.needs_decomposition, "program search should need decomposition")
    fork = engine.detect_fork(programs)
    _expect(not fork.should_fork, "nothing to fork over before any draft is saved")
    engine.generate_subtasks(programs)

    # Draft the university list, refine it, save it.
    research = _node_by_title(tree, "Research Universities and Programs")
    detection = engine.detect_actionability(research)
    _expect(not detection.needs_decomposition, "university research should be actionable")
    draft = engine.generate_draft(research, [])
    draft = engine.iterate_draft(research, draft, MIDWEST_INSTRUCTION)
    university_key = engine.save_draft(research, draft)

    # Faculty task forks over the saved university list.
    faculty = _node_by_title(tree, "Identify Faculty Members")
    detection = engine.detect_actionability(faculty)
    _expect(detection.needs_decomposition, "faculty task should need decomposition")
    fork = engine.detect_fork(faculty)
    _expect(fork.should_fork, "faculty task should fork over the university list")
    candidates = engine.select_context(faculty, "forking")
    _expect(
        [c.key for c in candidates] == [university_key],
        "fork selection should pick the university list",
    )
    engine.fork_task(faculty, [c.key for c in candidates if c.accepted])

    # Recommendation letters: standard decomposition.
    letters = _node_by_title(tree, "Get Recommendation Letters")
    detection = engine.detect_actionability(letters)
    _expect(detection.needs_decomposition, "letters task should need decomposition")
    fork = engine.detect_fork(letters)
    _expect(not fork.should_fork, "letters task should decompose sequentially")
    engine.generate_subtasks(letters)

    # Compile the recommender list from the CV plus the saved university list.
    compile_list = _node_by_title(tree, "Compile a List of Recommenders")
    detection = engine.detect_actionability(compile_list)
    _expect(not detection.needs_decomposition, "recommender list should be actionable")
    candidates = engine.select_context(compile_list, "drafting")
    draft = engine.generate_draft(compile_list, [c.key for c in candidates if c.accepted])
    recommender_key = engine.save_draft(compile_list, draft)

    # Outreach forks into one subtask per recommender.
    outreach = _node_by_title(tree, "Reach Out to Potential Recommenders")
    detection = engine.detect_actionability(outreach)
    _expect(detection.needs_decomposition, "outreach should need decomposition")
    fork = engine.detect_fork(outreach)
    _expect(fork.should_fork, "outreach should fork over the recommender list")
    candidates = engine.select_context(outreach, "forking")
    _expect(
        [c.key for c in candidates] == [recommender_key],
        "fork selection should pick the recommender list",
    )
    fork_ids = engine.fork_task(outreach, [c.key for c in candidates if c.accepted])
    fork_titles = [tree.node(i).title for i in fork_ids]
    _expect(
        fork_titles == [f"Reach Out to Potential Recommenders: {n}" for n in RECOMMENDER_NAMES],
        f"unexpected fork children {fork_titles}",
    )

    # Personalized email with context selection, then improve it via
    # draft-iteration elicitation.
    blake = _node_by_title(tree, f"Reach Out to Potential Recommenders: {RECOMMENDER_NAMES[0]}")
    detection = engine.detect_actionability(blake)
    _expect(not detection.needs_decomposition, "single email should be actionable")
    candidates = engine.select_context(blake, "drafting")
    _expect(len(candidates) == 2, "email drafting should select both saved drafts")
    draft = engine.generate_draft(blake, [c.key for c in candidates if c.accepted])
    followups = engine.elicit_draft_context(blake, draft)
    _expect(len(followups) == 2, "draft elicitation should produce two questions")
    draft = engine.regenerate_with_answers(
        blake,
        [
            ElicitationAnswer(followups[0].id, COLLABORATION_ANSWER),
            ElicitationAnswer(followups[1].id, ""),
        ],
    )
    _expect(RECOMMENDER_NAMES[0] in draft.content, "email should address the recommender")
    engine.save_draft(blake, draft)

    # Final invariants: structure, script consumption, event-sourcing identity.
    tree.validate()
    if script.remaining():
        raise ScriptMismatch(
            script.steps[script.cursor].match or "(any)",
            detail=f"{script.remaining()} scripted steps were never used",
        )
    if to_payload(replay(session.events)) != to_payload(session):
        raise CorruptSession("replayed event log does not match the materialized session")

    if out_path is not None:
        save(session, out_path)
    return session
