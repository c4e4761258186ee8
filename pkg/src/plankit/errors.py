"""Domain exceptions shared across the planning engine.

Every error carries a short ``code`` that the HTTP layer maps to a status;
the CLI maps error classes to exit codes.
"""

from __future__ import annotations


class PlanningError(Exception):
    """Base class for all domain errors."""

    code = "planning_error"


# --- task tree ---------------------------------------------------------------


class EmptyGoal(PlanningError):
    code = "empty_goal"


class UnknownNode(PlanningError):
    code = "unknown_node"

    def __init__(self, node_id: str) -> None:
        super().__init__(f"unknown node: {node_id!r}")
        self.node_id = node_id


class AlreadyDecomposed(PlanningError):
    code = "already_decomposed"


class EmptySubtaskList(PlanningError):
    code = "empty_subtask_list"


class TreeLimitExceeded(PlanningError):
    """Guardrail: tree depth or per-node fanout cap hit."""

    code = "tree_limit_exceeded"


class InvalidTree(PlanningError):
    """A structural invariant of the task tree does not hold."""

    code = "invalid_tree"


# --- context store -----------------------------------------------------------


class InvalidEntry(PlanningError):
    code = "invalid_entry"


class UnknownKey(PlanningError):
    code = "unknown_key"

    def __init__(self, key: str) -> None:
        super().__init__(f"unknown context key: {key!r}")
        self.key = key


# --- prompt templates --------------------------------------------------------


class MissingBinding(PlanningError):
    code = "missing_binding"

    def __init__(self, name: str) -> None:
        super().__init__(f"missing binding: {name!r}")
        self.name = name


class UnknownBinding(PlanningError):
    code = "unknown_binding"

    def __init__(self, name: str) -> None:
        super().__init__(f"binding does not match any placeholder: {name!r}")
        self.name = name


class UnreplacedPlaceholder(PlanningError):
    code = "unreplaced_placeholder"


class StrategyInputMismatch(PlanningError):
    """Level/draft inputs do not match what the detection strategy expects."""

    code = "strategy_input_mismatch"


# --- provider boundary -------------------------------------------------------


class ProviderError(PlanningError):
    code = "provider_error"


class ProviderHttp(ProviderError):
    code = "provider_http"

    def __init__(self, status: int, body_excerpt: str) -> None:
        super().__init__(f"provider returned HTTP {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class ProviderTimeout(ProviderError):
    code = "provider_timeout"


class ScriptExhausted(ProviderError):
    code = "script_exhausted"


class ScriptMismatch(ProviderError):
    code = "script_mismatch"

    def __init__(self, expected: str, detail: str = "") -> None:
        message = f"scripted step expected substring {expected!r}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.expected = expected


# --- response parsing --------------------------------------------------------


class UnparseableSubtasks(PlanningError):
    code = "unparseable_subtasks"


class UnparseableVerdict(PlanningError):
    code = "unparseable_verdict"


class NoValidKeys(PlanningError):
    code = "no_valid_keys"


class NoEntitiesFound(PlanningError):
    code = "no_entities_found"


# --- engine / session --------------------------------------------------------


class FeatureDisabled(PlanningError):
    code = "feature_disabled"

    def __init__(self, mode: str, feature: str) -> None:
        super().__init__(f"{feature} is disabled in mode {mode!r}")
        self.mode = mode
        self.feature = feature


class UnknownQuestion(PlanningError):
    code = "unknown_question"

    def __init__(self, question_id: str) -> None:
        super().__init__(f"unknown elicitation question: {question_id!r}")
        self.question_id = question_id


class InvalidAction(PlanningError):
    """An operation was called in a state or with arguments it cannot accept."""

    code = "invalid_action"


class CorruptSession(PlanningError):
    code = "corrupt_session"

    def __init__(self, detail: str) -> None:
        super().__init__(f"corrupt session: {detail}")
        self.detail = detail


class SchemaMismatch(PlanningError):
    code = "schema_mismatch"


class SessionLocked(PlanningError):
    code = "session_locked"


# --- eval harness ------------------------------------------------------------


class MalformedSuite(PlanningError):
    code = "malformed_suite"

    def __init__(self, line_no: int, detail: str) -> None:
        super().__init__(f"suite line {line_no}: {detail}")
        self.line_no = line_no
        self.detail = detail


# --- CLI ----------------------------------------------------------------------


class BadConfig(PlanningError):
    code = "bad_config"


class AddrInUse(PlanningError):
    code = "addr_in_use"
