"""plankit: an interactive planning engine.

Breaks a personal goal into a tree of actionable subtasks and scopes saved
context to each one: the engine elicits missing information, selects the
relevant saved entries per task, and reuses approved answer drafts in later
tasks. Ships with a deterministic scripted provider for offline runs, an
HTTP service, a CLI, and an evaluation harness for the six subtask-detection
prompting strategies.
"""

from .context_store import ContextEntry, ContextStore, Provenance, Scope
from .curation_engine import (
    AblationMode,
    CurationEngine,
    DraftCandidate,
    ElicitationAnswer,
    ElicitationQuestion,
    EngineConfig,
)
from .llm_provider import (
    ChatMessage,
    CompletionRequest,
    LiveProvider,
    MockProvider,
    ProviderConfig,
    ProviderScript,
)
from .prompt_library import DetectionStrategy, DetectionVariant, PromptLibrary, default_library
from .session import Session, SessionEvent, load, replay, save
from .task_graph import Decomposition, NodeStatus, TaskNode, TaskTree

__version__ = "0.1.0"

__all__ = [
    "AblationMode",
    "ChatMessage",
    "CompletionRequest",
    "ContextEntry",
    "ContextStore",
    "CurationEngine",
    "Decomposition",
    "DetectionStrategy",
    "DetectionVariant",
    "DraftCandidate",
    "ElicitationAnswer",
    "ElicitationQuestion",
    "EngineConfig",
    "LiveProvider",
    "MockProvider",
    "NodeStatus",
    "PromptLibrary",
    "Provenance",
    "ProviderConfig",
    "ProviderScript",
    "Scope",
    "Session",
    "SessionEvent",
    "TaskNode",
    "TaskTree",
    "default_library",
    "load",
    "replay",
    "save",
    "__version__",
]
