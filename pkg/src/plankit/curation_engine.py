"""Orchestrates planning over one session: elicitation, decomposition,
detection, forking, context selection, and draft work.

Every provider round trip is logged as a provider_call event; every state
change goes through the session event reducer, so a session can always be
rebuilt from its log. An ablation mode gates which curation mechanisms are
active: draft reuse is always on, context selection switches on above
reuse_only, and elicitation only in full_curation.
"""

from __future__ import annotations

import re
import time
import uuid
from dataclasses import dataclass, field
from typing import Sequence

from .context_store import (
    EMPTY_RENDERING,
    ContextEntry,
    Provenance,
    Scope,
)
from .errors import (
    AlreadyDecomposed,
    FeatureDisabled,
    InvalidAction,
    NoEntitiesFound,
    NoValidKeys,
    UnknownQuestion,
    UnparseableSubtasks,
    UnparseableVerdict,
)
from .llm_provider import (
    ChatMessage,
    ChatProvider,
    CompletionRequest,
    parse_key_selection,
    parse_subtask_list,
    parse_yes_no,
)
from .prompt_library import (
    DetectionStrategy,
    DetectionVariant,
    PromptLibrary,
    RenderedPrompt,
    TemplateId,
    default_library,
)
from .session import (
    AblationMode,
    DraftCandidate,
    DraftLineage,
    ElicitationQuestion,
    EventKind,
    Session,
    create_session,
    record_event,
    utc_now_iso,
)
from .task_graph import Decomposition, SubtaskSpec, TaskNode

# Re-exported here because this module owns their semantics.
__all__ = [
    "AblationMode",
    "CurationEngine",
    "DetectionResult",
    "DraftCandidate",
    "DraftLineage",
    "ElicitationAnswer",
    "ElicitationQuestion",
    "EngineConfig",
    "ForkDecision",
    "SelectionCandidate",
]

ELICITATION_TAGS = ("elicit_global", "elicit_draft")

_QUESTION_LINE_RE = re.compile(r"^\s*\d+[.)]\s+(.*\S)\s*$")
_FILE_MARKER_RE = re.compile(r"\s*\[file\]\s*", re.IGNORECASE)

VERDICT_REMINDER = "Answer with exactly 'Answer: Yes' or 'Answer: No'."
SUBTASK_FORMAT_REMINDER = (
    "Answer with a numbered list only, one item per line, formatted exactly as "
    "'1. Title — Description — Estimated duration'."
)
NO_ENTITIES_MARKER = "NO ENTITIES"


@dataclass
class EngineConfig:
    mode: AblationMode = AblationMode.FULL_CURATION
    strategy: DetectionVariant = DetectionVariant.FEW_SHOT_COT_TREE
    # Per-template request parameter overrides, e.g. {"generate_draft": {"temperature": 0.7}}.
    template_params: dict[str, dict] = field(default_factory=dict)


@dataclass
class ElicitationAnswer:
    question_id: str
    text: str = ""
    is_file: bool | None = None  # None: use the question's expects_file flag

    @property
    def skipped(self) -> bool:
        return not self.text.strip()


@dataclass
class SelectionCandidate:
    key: str
    reason: str
    accepted: bool = True

    def to_dict(self) -> dict:
        return {"key": self.key, "reason": self.reason, "accepted": self.accepted}


@dataclass
class DetectionResult:
    needs_decomposition: bool
    reasoning: str


@dataclass
class ForkDecision:
    should_fork: bool
    reasoning: str


class CurationEngine:
    """Single-writer orchestrator for one planning session."""

    def __init__(
        self,
        provider: ChatProvider,
        config: EngineConfig | None = None,
        library: PromptLibrary | None = None,
        session: Session | None = None,
        clock=None,
        timer=None,
    ) -> None:
        self.provider = provider
        self.config = config or EngineConfig()
        self.library = library or default_library()
        self.session = session
        self._clock = clock or utc_now_iso
        self._timer = timer or time.monotonic
        if session is not None:
            self.config.mode = session.mode

    # --- session lifecycle ------------------------------------------------

    def start(
        self, goal_title: str, goal_description: str = "", session_id: str | None = None
    ) -> Session:
        if self.session is not None:
            raise InvalidAction("engine already has an active session")
        session_id = session_id or f"s-{uuid.uuid4().hex[:12]}"
        self.session = create_session(
            session_id, goal_title, goal_description, self.config.mode, at=self._clock()
        )
        return self.session

    @property
    def mode(self) -> AblationMode:
        return self.config.mode

    def _require_session(self) -> Session:
        if self.session is None:
            raise InvalidAction("no active session; call start() first")
        return self.session

    def _node(self, node_id: str) -> TaskNode:
        return self._require_session().tree.node(node_id)

    # --- provider plumbing ------------------------------------------------

    def _request_params(self, template_id: str) -> dict:
        params = {"temperature": 1.0, "max_tokens": 2048, "top_p": 1.0}
        params.update(self.config.template_params.get(template_id, {}))
        return params

    def _complete(self, messages: Sequence[ChatMessage], tag: str, template_id: str) -> str:
        request = CompletionRequest(
            messages=tuple(messages), tag=tag, **self._request_params(template_id)
        )
        started = self._timer()
        result = self.provider.complete(request)
        latency_ms = int(round((self._timer() - started) * 1000))
        record_event(
            self._require_session(),
            EventKind.PROVIDER_CALL,
            {
                "tag": tag,
                "model": getattr(self.provider, "identity", "unknown"),
                "prompt_chars": result.usage.prompt_chars,
                "response_chars": result.usage.response_chars,
                "latency_ms": latency_ms,
            },
            at=self._clock(),
        )
        return result.text

    def _complete_prompt(self, rendered: RenderedPrompt, tag: str, template_id: str) -> str:
        return self._complete(
            [ChatMessage("system", rendered.system), ChatMessage("user", rendered.user)],
            tag,
            template_id,
        )

    def _ask_yes_no(self, rendered: RenderedPrompt, tag: str, polarity: str, template_id: str):
        """One verdict request, with a single formatting re-ask on parse failure."""
        messages = [ChatMessage("system", rendered.system), ChatMessage("user", rendered.user)]
        text = self._complete(messages, tag, template_id)
        try:
            return parse_yes_no(text, polarity)
        except UnparseableVerdict:
            retry = messages + [
                ChatMessage("assistant", text or "(empty)"),
                ChatMessage("user", VERDICT_REMINDER),
            ]
            return parse_yes_no(self._complete(retry, tag, template_id), polarity)

    def _ask_subtasks(self, rendered: RenderedPrompt, tag: str, template_id: str):
        messages = [ChatMessage("system", rendered.system), ChatMessage("user", rendered.user)]
        text = self._complete(messages, tag, template_id)
        try:
            return text, parse_subtask_list(text)
        except UnparseableSubtasks:
            retry = messages + [
                ChatMessage("assistant", text or "(empty)"),
                ChatMessage("user", SUBTASK_FORMAT_REMINDER),
            ]
            retry_text = self._complete(retry, tag, template_id)
            return retry_text, parse_subtask_list(retry_text)

    def _record(self, kind: EventKind, payload: dict) -> None:
        record_event(self._require_session(), kind, payload, at=self._clock())

    # --- context plumbing ---------------------------------------------------

    def _compose_user_context(self, local_keys: Sequence[str] | None) -> str:
        """Global context rendered whole, plus either all local entries
        (reuse without selection) or exactly the selected ones."""
        store = self._require_session().context
        global_part = store.render_scope(Scope.GLOBAL)
        if local_keys is None:
            local_part = store.render_scope(Scope.LOCAL)
        else:
            local_part = store.render_selected(local_keys)
        parts = [p for p in (global_part, local_part) if p != EMPTY_RENDERING]
        return "\n".join(parts) if parts else EMPTY_RENDERING

    def _context_history(self) -> str:
        infos = self._require_session().context.list_keys(Scope.LOCAL)
        return "\n".join(f"- {info.key} ({info.provenance.value})" for info in infos)

    def _commit_entry(
        self,
        key: str,
        value: str,
        scope: Scope,
        provenance: Provenance,
        question_id: str | None = None,
        source_node: str | None = None,
    ) -> None:
        entry = ContextEntry(
            key=key,
            value=value,
            scope=scope,
            provenance=provenance,
            source_node=source_node,
            created_at=self._clock(),
        )
        entry.validate()
        store = self._require_session().context
        if store.has(scope, key) and store.get(scope, key).provenance is not provenance:
            self._record(
                EventKind.WARNING,
                {
                    "message": f"context key {key!r} overwritten with different provenance",
                    "key": key,
                    "scope": scope.value,
                },
            )
        payload = {
            "question_id": question_id,
            "key": key,
            "value": value,
            "provenance": provenance.value,
            "scope": scope.value,
        }
        if source_node is not None:
            payload["source_node"] = source_node
        self._record(EventKind.ANSWER_COMMITTED, payload)

    # --- elicitation ----------------------------------------------------------

    def elicit_global_context(self) -> list[ElicitationQuestion]:
        """Ask the model what goal-level context to collect from the user."""
        session = self._require_session()
        if self.mode is not AblationMode.FULL_CURATION:
            raise FeatureDisabled(self.mode.value, "context elicitation")
        rendered = self.library.render(
            TemplateId.ELICIT_GLOBAL, {"main_purpose": session.goal}
        )
        text = self._complete_prompt(rendered, "elicit_global", TemplateId.ELICIT_GLOBAL.value)
        questions = self._parse_questions(text)
        self._record(
            EventKind.QUESTIONS_GENERATED,
            {"scope": "global", "questions": questions},
        )
        return list(session.pending_questions)

    @staticmethod
    def _parse_questions(text: str) -> list[dict]:
        questions = []
        for line in text.splitlines():
            match = _QUESTION_LINE_RE.match(line)
            if match is None:
                continue
            body = match.group(1)
            expects_file = bool(_FILE_MARKER_RE.search(body))
            body = _FILE_MARKER_RE.sub(" ", body).strip()
            if not body:
                continue
            questions.append(
                {"id": f"q{len(questions) + 1}", "question": body, "expects_file": expects_file}
            )
        return questions

    def commit_elicited(self, answers: Sequence[ElicitationAnswer]) -> list[str]:
        """Store answered questions as global context; skips leave no entry.

        Returns the keys created or updated by this commit.
        """
        session = self._require_session()
        pending = {q.id: q for q in session.pending_questions}
        created: list[str] = []
        for answer in answers:
            question = pending.get(answer.question_id)
            if question is None:
                raise UnknownQuestion(answer.question_id)
            if answer.skipped:
                self._record(
                    EventKind.ANSWER_COMMITTED,
                    {"question_id": answer.question_id, "skipped": True},
                )
                continue
            is_file = question.expects_file if answer.is_file is None else answer.is_file
            provenance = Provenance.UPLOADED_DOCUMENT if is_file else Provenance.ELICITED_ANSWER
            key = question.question[:80].strip()
            self._commit_entry(
                key,
                answer.text,
                Scope.GLOBAL,
                provenance,
                question_id=answer.question_id,
            )
            created.append(key)
        return created

    # --- decomposition ----------------------------------------------------------

    def generate_subtasks(self, node_id: str) -> list[str]:
        """Standard breakdown: attach model-suggested children to a node."""
        session = self._require_session()
        node = self._node(node_id)
        if node.children:
            raise AlreadyDecomposed(f"node {node_id!r} is already decomposed")
        rendered = self.library.render(
            TemplateId.GENERATE_SUBTASKS,
            {
                "main_purpose": session.goal,
                "user_context": session.context.render_scope(Scope.GLOBAL),
                "task_name": node.title,
                "task_description": node.description,
                "tree_outline": session.tree.outline(),
            },
        )
        _, specs = self._ask_subtasks(
            rendered, "generate_subtasks", TemplateId.GENERATE_SUBTASKS.value
        )
        return self._attach(node_id, specs, Decomposition.STANDARD)

    def _attach(self, parent: str, specs: list[SubtaskSpec], kind: Decomposition) -> list[str]:
        session = self._require_session()
        ids = session.tree.next_ids(len(specs))
        self._record(
            EventKind.SUBTASKS_ATTACHED,
            {
                "parent": parent,
                "kind": kind.value,
                "children": [
                    {
                        "id": child_id,
                        "title": spec.title,
                        "description": spec.description,
                        "estimated_duration": spec.estimated_duration,
                    }
                    for child_id, spec in zip(ids, specs)
                ],
            },
        )
        return ids

    def detect_actionability(
        self, node_id: str, strategy: DetectionVariant | str | None = None
    ) -> DetectionResult:
        """Classify a node as actionable or needing decomposition."""
        node = self._node(node_id)
        strat = DetectionStrategy.for_variant(strategy or self.config.strategy)
        draft_text: str | None = None
        if strat.includes_draft:
            draft_text = self._throwaway_draft(node)
        rendered = self.library.detection_prompt(
            strat,
            node.title,
            node.description,
            level=node.level if strat.includes_level else None,
            draft=draft_text,
        )
        verdict = self._ask_yes_no(
            rendered,
            f"detect_subtask:{strat.variant.value}",
            strat.polarity,
            TemplateId.DETECT_SUBTASK.value,
        )
        self._record(
            EventKind.DETECTION,
            {
                "node": node_id,
                "strategy": strat.variant.value,
                "needs_decomposition": verdict.needs_decomposition,
                "reasoning": verdict.reasoning,
            },
        )
        return DetectionResult(verdict.needs_decomposition, verdict.reasoning)

    def _throwaway_draft(self, node: TaskNode) -> str:
        """Draft generated only to inform detection; never shown or saved."""
        local_keys = None if self.mode is AblationMode.REUSE_ONLY else []
        rendered = self._render_draft_prompt(node, local_keys)
        return self._complete_prompt(rendered, "detect_draft", TemplateId.GENERATE_DRAFT.value)

    def _last_event_payload(self, kind: EventKind, node_id: str) -> dict | None:
        for event in reversed(self._require_session().events):
            if event.kind is kind and event.payload.get("node") == node_id:
                return event.payload
        return None

    def detect_fork(self, node_id: str) -> ForkDecision:
        """Decide whether a decomposition-flagged node should fork over
        entities in the saved context. Empty local context short-circuits to
        a non-fork (nothing to fork over)."""
        session = self._require_session()
        node = self._node(node_id)
        detection = self._last_event_payload(EventKind.DETECTION, node_id)
        if detection is None or not detection["needs_decomposition"]:
            raise InvalidAction(
                f"fork check requires node {node_id!r} to be flagged for decomposition"
            )
        if not session.context.keys(Scope.LOCAL):
            decision = ForkDecision(
                should_fork=False, reasoning="no local context entries to fork over"
            )
        else:
            rendered = self.library.render(
                TemplateId.FORK_DECISION,
                {
                    "task_name": node.title,
                    "task_description": node.description,
                    "context_history": self._context_history(),
                },
            )
            # The fork prompt asks "should this fork" directly, so a raw Yes
            # is a fork vote.
            verdict = self._ask_yes_no(
                rendered, "fork_decision", "yes_means_decompose", TemplateId.FORK_DECISION.value
            )
            decision = ForkDecision(verdict.needs_decomposition, verdict.reasoning)
        self._record(
            EventKind.FORK_DECISION,
            {
                "node": node_id,
                "should_fork": decision.should_fork,
                "reasoning": decision.reasoning,
            },
        )
        return decision

    def select_context(self, node_id: str, purpose: str) -> list[SelectionCandidate]:
        """Model-suggested subset of local context keys for drafting or
        forking; the user may toggle the returned candidates."""
        session = self._require_session()
        if self.mode is AblationMode.REUSE_ONLY:
            raise FeatureDisabled(self.mode.value, "context selection")
        if purpose not in ("drafting", "forking"):
            raise InvalidAction(f"unknown selection purpose {purpose!r}")
        node = self._node(node_id)
        local = session.context.keys(Scope.LOCAL)
        if not local:
            if purpose == "forking":
                raise NoValidKeys("local context is empty; nothing to fork over")
            self._record(
                EventKind.CONTEXT_SELECTED, {"node": node_id, "purpose": purpose, "candidates": []}
            )
            return []
        template = (
            TemplateId.SELECT_CONTEXT_FORK if purpose == "forking" else TemplateId.SELECT_CONTEXT_DRAFT
        )
        rendered = self.library.render(
            template,
            {
                "main_purpose": session.goal,
                "task_name": node.title,
                "task_description": node.description,
                "context_history": self._context_history(),
            },
        )
        text = self._complete_prompt(rendered, f"select_context_{purpose}", template.value)
        selections = parse_key_selection(text, local)
        candidates = [SelectionCandidate(s.key, s.reason, accepted=True) for s in selections]
        self._record(
            EventKind.CONTEXT_SELECTED,
            {
                "node": node_id,
                "purpose": purpose,
                "candidates": [c.to_dict() for c in candidates],
            },
        )
        return candidates

    def fork_task(self, node_id: str, accepted_keys: Sequence[str]) -> list[str]:
        """Entity-based decomposition: one child per entity found in the
        accepted context, titled "<parent title>: <entity>"."""
        session = self._require_session()
        node = self._node(node_id)
        if node.children:
            raise AlreadyDecomposed(f"node {node_id!r} is already decomposed")
        fork_decision = self._last_event_payload(EventKind.FORK_DECISION, node_id)
        if fork_decision is None or not fork_decision["should_fork"]:
            raise InvalidAction(f"node {node_id!r} was not flagged for forking")
        user_context = session.context.render_selected(accepted_keys)
        rendered = self.library.render(
            TemplateId.FORK_EXTRACTION,
            {
                "task_name": node.title,
                "task_description": node.description,
                "user_context": user_context,
            },
        )
        messages = [ChatMessage("system", rendered.system), ChatMessage("user", rendered.user)]
        text = self._complete(messages, "fork_extraction", TemplateId.FORK_EXTRACTION.value)
        if self._says_no_entities(text):
            raise NoEntitiesFound("selected context contains no enumerable entities")
        try:
            entities = parse_subtask_list(text)
        except UnparseableSubtasks:
            retry = messages + [
                ChatMessage("assistant", text or "(empty)"),
                ChatMessage("user", SUBTASK_FORMAT_REMINDER),
            ]
            retry_text = self._complete(retry, "fork_extraction", TemplateId.FORK_EXTRACTION.value)
            if self._says_no_entities(retry_text):
                raise NoEntitiesFound("selected context contains no enumerable entities") from None
            entities = parse_subtask_list(retry_text)
        specs = [
            SubtaskSpec(
                title=f"{node.title}: {entity.title}",
                description=entity.description,
                estimated_duration=entity.estimated_duration,
            )
            for entity in entities
        ]
        return self._attach(node_id, specs, Decomposition.FORK)

    @staticmethod
    def _says_no_entities(text: str) -> bool:
        return any(line.strip().upper() == NO_ENTITIES_MARKER for line in text.splitlines())

    # --- drafting -----------------------------------------------------------------

    def _render_draft_prompt(self, node: TaskNode, local_keys: Sequence[str] | None) -> RenderedPrompt:
        session = self._require_session()
        return self.library.render(
            TemplateId.GENERATE_DRAFT,
            {
                "main_purpose": session.goal,
                "user_context": self._compose_user_context(local_keys),
                "current_task": node.title,
                "task_description": node.description,
            },
        )

    def _make_draft(
        self, node_id: str, accepted_keys: Sequence[str], lineage: DraftLineage
    ) -> DraftCandidate:
        session = self._require_session()
        node = self._node(node_id)
        if self.mode is AblationMode.REUSE_ONLY:
            # Without selection, every saved local entry rides along.
            keys_used = session.context.keys(Scope.LOCAL)
            local_keys: Sequence[str] | None = None
        else:
            keys_used = list(dict.fromkeys(accepted_keys))
            local_keys = keys_used
        rendered = self._render_draft_prompt(node, local_keys)
        content = self._complete_prompt(rendered, "generate_draft", TemplateId.GENERATE_DRAFT.value)
        return self._record_draft(node_id, content, keys_used, lineage)

    def _record_draft(
        self, node_id: str, content: str, keys_used: Sequence[str], lineage: DraftLineage
    ) -> DraftCandidate:
        session = self._require_session()
        revision = len(session.drafts.get(node_id, [])) + 1
        self._record(
            EventKind.DRAFT_GENERATED,
            {
                "node": node_id,
                "content": content,
                "context_keys_used": list(keys_used),
                "revision": revision,
                "lineage": lineage.value,
            },
        )
        candidate = session.latest_draft(node_id)
        assert candidate is not None
        return candidate

    def generate_draft(self, node_id: str, accepted_keys: Sequence[str] = ()) -> DraftCandidate:
        """First draft for a node, or a plain regeneration on later calls."""
        session = self._require_session()
        lineage = (
            DraftLineage.INITIAL if not session.drafts.get(node_id) else DraftLineage.REGENERATED
        )
        return self._make_draft(node_id, accepted_keys, lineage)

    def elicit_draft_context(self, node_id: str, candidate: DraftCandidate) -> list[ElicitationQuestion]:
        """Clarifying questions for improving an unsatisfying draft."""
        session = self._require_session()
        if self.mode is not AblationMode.FULL_CURATION:
            raise FeatureDisabled(self.mode.value, "draft context elicitation")
        node = self._node(node_id)
        if candidate.node != node_id:
            raise InvalidAction("draft candidate belongs to a different node")
        rendered = self.library.render(
            TemplateId.ELICIT_DRAFT_ITERATION,
            {
                "main_purpose": session.goal,
                "task_name": node.title,
                "task_description": node.description,
                "draft": candidate.content,
            },
        )
        text = self._complete_prompt(
            rendered, "elicit_draft", TemplateId.ELICIT_DRAFT_ITERATION.value
        )
        questions = self._parse_questions(text)
        self._record(
            EventKind.QUESTIONS_GENERATED,
            {"scope": "draft", "node": node_id, "questions": questions},
        )
        return list(session.pending_questions)

    def regenerate_with_answers(
        self, node_id: str, answers: Sequence[ElicitationAnswer]
    ) -> DraftCandidate:
        """Commit draft-iteration answers as local context, then regenerate."""
        session = self._require_session()
        if self.mode is not AblationMode.FULL_CURATION:
            raise FeatureDisabled(self.mode.value, "draft context elicitation")
        latest = session.latest_draft(node_id)
        if latest is None:
            raise InvalidAction(f"node {node_id!r} has no draft to regenerate")
        pending = {q.id: q for q in session.pending_questions}
        new_keys: list[str] = []
        for answer in answers:
            question = pending.get(answer.question_id)
            if question is None:
                raise UnknownQuestion(answer.question_id)
            if answer.skipped:
                self._record(
                    EventKind.ANSWER_COMMITTED,
                    {"question_id": answer.question_id, "skipped": True},
                )
                continue
            key = question.question[:80].strip()
            self._commit_entry(
                key,
                answer.text,
                Scope.LOCAL,
                Provenance.USER_ADDED,
                question_id=answer.question_id,
            )
            new_keys.append(key)
        keys = list(dict.fromkeys([*latest.context_keys_used, *new_keys]))
        lineage = (
            DraftLineage.REGENERATED_WITH_CONTEXT if new_keys else DraftLineage.REGENERATED
        )
        return self._make_draft(node_id, keys, lineage)

    def iterate_draft(
        self, node_id: str, candidate: DraftCandidate, instruction: str
    ) -> DraftCandidate:
        """Follow-up turn refining the given draft with a user instruction."""
        node = self._node(node_id)
        if candidate.node != node_id:
            raise InvalidAction("draft candidate belongs to a different node")
        if not instruction.strip():
            raise InvalidAction("iteration instruction must be non-empty")
        local_keys: Sequence[str] | None = (
            None if self.mode is AblationMode.REUSE_ONLY else candidate.context_keys_used
        )
        base = self._render_draft_prompt(node, local_keys)
        messages = [
            ChatMessage("system", base.system),
            ChatMessage("user", base.user),
            ChatMessage("assistant", candidate.content or "(empty draft)"),
            ChatMessage("user", instruction),
        ]
        content = self._complete(messages, "iterate_draft", TemplateId.GENERATE_DRAFT.value)
        return self._record_draft(
            node_id, content, candidate.context_keys_used, DraftLineage.ITERATED
        )

    def save_draft(self, node_id: str, candidate: DraftCandidate) -> str:
        """Store a draft as reusable local context and mark the node done."""
        session = self._require_session()
        node = self._node(node_id)
        if candidate.node != node_id:
            raise InvalidAction("draft candidate belongs to a different node")
        key = f"{node.title} — draft"
        store = session.context
        if store.has(Scope.LOCAL, key) and store.get(Scope.LOCAL, key).provenance is not Provenance.SAVED_DRAFT:
            self._record(
                EventKind.WARNING,
                {
                    "message": f"saved draft overwrites user context key {key!r}",
                    "key": key,
                    "scope": Scope.LOCAL.value,
                },
            )
        self._record(
            EventKind.DRAFT_SAVED,
            {"node": node_id, "key": key, "revision": candidate.revision},
        )
        return key

    # --- direct context additions ----------------------------------------------

    def add_user_context(self, key: str, value: str) -> str:
        """Store a user-provided local entry (drop-down "add context" path)."""
        self._require_session()
        self._commit_entry(key, value, Scope.LOCAL, Provenance.USER_ADDED)
        return key

    # --- introspection helpers ----------------------------------------------------

    def last_detection(self, node_id: str) -> dict | None:
        return self._last_event_payload(EventKind.DETECTION, node_id)

    def last_fork_decision(self, node_id: str) -> dict | None:
        return self._last_event_payload(EventKind.FORK_DECISION, node_id)
