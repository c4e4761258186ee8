"""Two-tier key-value context memory.

Global entries hold goal-level information gathered up front; local entries
hold saved answer drafts and anything the user adds while working. Rendering
is deterministic (insertion order) so prompts are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import InvalidEntry, UnknownKey

MAX_VALUE_BYTES = 64 * 1024
EMPTY_RENDERING = "(no context)"


class Scope(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


class Provenance(str, Enum):
    GOAL_STATEMENT = "goal_statement"
    ELICITED_ANSWER = "elicited_answer"
    UPLOADED_DOCUMENT = "uploaded_document"
    SAVED_DRAFT = "saved_draft"
    USER_ADDED = "user_added"


# These provenances describe goal-level information and only make sense globally.
GLOBAL_ONLY_PROVENANCE = frozenset(
    {Provenance.GOAL_STATEMENT, Provenance.ELICITED_ANSWER, Provenance.UPLOADED_DOCUMENT}
)


@dataclass
class ContextEntry:
    key: str
    value: str
    scope: Scope
    provenance: Provenance
    source_node: str | None = None
    created_at: str = ""

    def validate(self) -> None:
        if not self.key or not self.key.strip():
            raise InvalidEntry("context key must be non-empty")
        if len(self.value.encode("utf-8")) > MAX_VALUE_BYTES:
            raise InvalidEntry(f"value exceeds {MAX_VALUE_BYTES} bytes")
        if self.provenance is Provenance.SAVED_DRAFT:
            if self.source_node is None:
                raise InvalidEntry("saved_draft entries require a source node")
            if self.scope is not Scope.LOCAL:
                raise InvalidEntry("saved_draft entries are local")
        if self.provenance in GLOBAL_ONLY_PROVENANCE and self.scope is not Scope.GLOBAL:
            raise InvalidEntry(f"{self.provenance.value} entries belong to the global scope")

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "value": self.value,
            "scope": self.scope.value,
            "provenance": self.provenance.value,
            "source_node": self.source_node,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContextEntry":
        return cls(
            key=data["key"],
            value=data["value"],
            scope=Scope(data["scope"]),
            provenance=Provenance(data["provenance"]),
            source_node=data["source_node"],
            created_at=data["created_at"],
        )


@dataclass
class KeyInfo:
    """Checklist metadata; values stay out so listings remain lightweight."""

    key: str
    provenance: Provenance
    source_node: str | None = None

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "provenance": self.provenance.value,
            "source_node": self.source_node,
        }


class ContextStore:
    """Insertion-ordered (scope, key) -> entry map with per-scope uniqueness."""

    def __init__(self) -> None:
        self._entries: dict[tuple[Scope, str], ContextEntry] = {}

    def put(self, entry: ContextEntry) -> None:
        """Store an entry; an existing (scope, key) is overwritten in place."""
        entry.validate()
        self._entries[(entry.scope, entry.key)] = entry

    def has(self, scope: Scope, key: str) -> bool:
        return (scope, key) in self._entries

    def get(self, scope: Scope, key: str) -> ContextEntry:
        try:
            return self._entries[(scope, key)]
        except KeyError:
            raise UnknownKey(key) from None

    def keys(self, scope: Scope) -> list[str]:
        return [k for (s, k) in self._entries if s is scope]

    def list_keys(self, scope: Scope) -> list[KeyInfo]:
        return [
            KeyInfo(key=e.key, provenance=e.provenance, source_node=e.source_node)
            for e in self._entries.values()
            if e.scope is scope
        ]

    def render_scope(self, scope: Scope) -> str:
        lines = [f"{e.key}: {e.value}" for e in self._entries.values() if e.scope is scope]
        return "\n".join(lines) if lines else EMPTY_RENDERING

    def render_selected(self, keys: Sequence[str]) -> str:
        """Render only the named local entries, in the order given."""
        lines = []
        for key in keys:
            entry = self.get(Scope.LOCAL, key)
            lines.append(f"{entry.key}: {entry.value}")
        return "\n".join(lines) if lines else EMPTY_RENDERING

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self._entries.values()]

    @classmethod
    def from_list(cls, data: Sequence[dict]) -> "ContextStore":
        store = cls()
        for item in data:
            store.put(ContextEntry.from_dict(item))
        return store
