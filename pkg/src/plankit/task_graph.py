"""Hierarchical task tree: a goal root decomposed into subtask nodes.

The tree is the backbone of a planning session. Nodes are never deleted;
decomposition happens at most once per node, either as a standard breakdown
or as a fork (one subtask per distinct entity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

from .errors import (
    AlreadyDecomposed,
    EmptyGoal,
    EmptySubtaskList,
    InvalidTree,
    TreeLimitExceeded,
    UnknownNode,
)

# Guardrails; interactive plans stay far below these.
MAX_DEPTH = 6
MAX_FANOUT = 12


class NodeStatus(str, Enum):
    UNEXPLORED = "unexplored"
    EXPLORING = "exploring"
    COMPLETED = "completed"


class Decomposition(str, Enum):
    NONE = "none"
    STANDARD = "standard"
    FORK = "fork"


@dataclass
class SubtaskSpec:
    """Plain subtask payload, as parsed from a model response."""

    title: str
    description: str = ""
    estimated_duration: str = "unspecified"


@dataclass
class TaskNode:
    id: str
    title: str
    description: str = ""
    estimated_duration: str = "unspecified"
    status: NodeStatus = NodeStatus.UNEXPLORED
    decomposition: Decomposition = Decomposition.NONE
    draft_ref: str | None = None
    parent: str | None = None
    children: list[str] = field(default_factory=list)
    level: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "description": self.description,
            "estimated_duration": self.estimated_duration,
            "status": self.status.value,
            "decomposition": self.decomposition.value,
            "draft_ref": self.draft_ref,
            "parent": self.parent,
            "children": list(self.children),
            "level": self.level,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskNode":
        return cls(
            id=data["id"],
            title=data["title"],
            description=data["description"],
            estimated_duration=data["estimated_duration"],
            status=NodeStatus(data["status"]),
            decomposition=Decomposition(data["decomposition"]),
            draft_ref=data["draft_ref"],
            parent=data["parent"],
            children=list(data["children"]),
            level=data["level"],
        )


class TaskTree:
    """Goal root plus its decomposition, with single-writer mutation ops."""

    def __init__(self, root: str, nodes: dict[str, TaskNode], created_at: str) -> None:
        self.root = root
        self.nodes = nodes
        self.created_at = created_at

    @classmethod
    def create(cls, goal_title: str, goal_description: str = "", created_at: str = "") -> "TaskTree":
        """Start a tree whose root is the goal itself."""
        if not goal_title.strip():
            raise EmptyGoal("goal title must not be blank")
        root = TaskNode(
            id="n1",
            title=goal_title,
            description=goal_description,
            status=NodeStatus.EXPLORING,
            level=0,
        )
        return cls(root="n1", nodes={"n1": root}, created_at=created_at)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def node(self, node_id: str) -> TaskNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def next_ids(self, count: int) -> list[str]:
        """Fresh ids for `count` new nodes (monotonic counter, no deletion)."""
        start = len(self.nodes) + 1
        return [f"n{start + i}" for i in range(count)]

    def attach_subtasks(
        self,
        parent: str,
        subtasks: Sequence[SubtaskSpec],
        kind: Decomposition,
        ids: Sequence[str] | None = None,
    ) -> list[str]:
        """Attach children to an undecomposed node, in the given order.

        `ids` is only passed when replaying events; fresh ids are generated
        otherwise.
        """
        node = self.node(parent)
        if node.children:
            raise AlreadyDecomposed(f"node {parent!r} already has children")
        if not subtasks:
            raise EmptySubtaskList("at least one subtask is required")
        if kind not in (Decomposition.STANDARD, Decomposition.FORK):
            raise InvalidTree(f"cannot attach with kind {kind!r}")
        if node.level + 1 > MAX_DEPTH:
            raise TreeLimitExceeded(f"depth cap {MAX_DEPTH} reached at node {parent!r}")
        if len(subtasks) > MAX_FANOUT:
            raise TreeLimitExceeded(f"fanout cap {MAX_FANOUT} exceeded ({len(subtasks)} subtasks)")

        if ids is None:
            ids = self.next_ids(len(subtasks))
        elif len(ids) != len(subtasks) or any(i in self.nodes for i in ids):
            raise InvalidTree("replayed child ids collide or do not match subtask count")

        for child_id, spec in zip(ids, subtasks):
            self.nodes[child_id] = TaskNode(
                id=child_id,
                title=spec.title,
                description=spec.description,
                estimated_duration=spec.estimated_duration,
                parent=parent,
                level=node.level + 1,
            )
            node.children.append(child_id)
        node.decomposition = kind
        return list(ids)

    def set_draft_ref(self, node_id: str, draft_key: str) -> None:
        """Mark a node completed by pointing it at a saved draft key.

        Last write wins; completion rolls up to ancestors whose children are
        all completed.
        """
        node = self.node(node_id)
        node.draft_ref = draft_key
        node.status = NodeStatus.COMPLETED
        current = node.parent
        while current is not None:
            parent = self.nodes[current]
            if all(self.nodes[c].status is NodeStatus.COMPLETED for c in parent.children):
                parent.status = NodeStatus.COMPLETED
                current = parent.parent
            else:
                break

    def mark_exploring(self, node_id: str) -> None:
        node = self.node(node_id)
        if node.status is NodeStatus.UNEXPLORED:
            node.status = NodeStatus.EXPLORING

    def outline(self) -> str:
        """Deterministic depth-first rendering, two spaces per level."""
        lines: list[str] = []

        def walk(node_id: str, depth: int) -> None:
            node = self.nodes[node_id]
            lines.append("  " * depth + f"{node.title}: {node.description}")
            for child in node.children:
                walk(child, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)

    def node_path(self, node_id: str) -> list[str]:
        """Ids from the root down to `node_id`, inclusive."""
        node = self.node(node_id)
        path = [node.id]
        steps = 0
        while node.parent is not None:
            steps += 1
            if steps > node.level + len(self.nodes):
                raise InvalidTree(f"parent chain from {node_id!r} does not reach the root")
            node = self.node(node.parent)
            path.append(node.id)
        path.reverse()
        return path

    def walk(self) -> Iterator[TaskNode]:
        """Depth-first iteration in outline order."""

        def visit(node_id: str) -> Iterator[TaskNode]:
            node = self.nodes[node_id]
            yield node
            for child in node.children:
                yield from visit(child)

        return visit(self.root)

    def validate(self) -> None:
        """Full invariant sweep; raises InvalidTree with the first violation."""
        if self.root not in self.nodes:
            raise InvalidTree("root id missing from node table")
        roots = [n for n in self.nodes.values() if n.parent is None]
        if len(roots) != 1 or roots[0].id != self.root:
            raise InvalidTree("exactly one parentless node (the root) is required")
        if self.nodes[self.root].level != 0:
            raise InvalidTree("root level must be 0")

        for node_id, node in self.nodes.items():
            if node.id != node_id:
                raise InvalidTree(f"node table key {node_id!r} does not match node id {node.id!r}")
            if node.level > MAX_DEPTH:
                raise InvalidTree(f"node {node_id!r} exceeds depth cap {MAX_DEPTH}")
            if len(node.children) > MAX_FANOUT:
                raise InvalidTree(f"node {node_id!r} exceeds fanout cap {MAX_FANOUT}")
            if (node.decomposition is Decomposition.NONE) != (not node.children):
                raise InvalidTree(f"node {node_id!r}: decomposition flag disagrees with children")
            if node.parent is not None:
                parent = self.nodes.get(node.parent)
                if parent is None:
                    raise InvalidTree(f"node {node_id!r} references unknown parent {node.parent!r}")
                if node_id not in parent.children:
                    raise InvalidTree(f"node {node_id!r} is missing from its parent's children")
            for child_id in node.children:
                child = self.nodes.get(child_id)
                if child is None:
                    raise InvalidTree(f"node {node_id!r} references unknown child {child_id!r}")
                if child.parent != node_id:
                    raise InvalidTree(f"child {child_id!r} does not point back to {node_id!r}")
                if child.level != node.level + 1:
                    raise InvalidTree(f"child {child_id!r} level is not parent level + 1")
            if node.status is NodeStatus.COMPLETED and node.draft_ref is None:
                if not node.children or any(
                    self.nodes[c].status is not NodeStatus.COMPLETED for c in node.children
                ):
                    raise InvalidTree(
                        f"completed node {node_id!r} has no draft and incomplete children"
                    )
            # Acyclicity: the parent chain must reach the root in `level` steps.
            current = node
            for _ in range(node.level):
                if current.parent is None:
                    break
                current = self.nodes[current.parent]
            if current.id != self.root:
                raise InvalidTree(f"node {node_id!r} does not reach the root in level steps")

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "created_at": self.created_at,
            "nodes": {node.id: node.to_dict() for node in self.walk()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskTree":
        nodes = {nid: TaskNode.from_dict(nd) for nid, nd in data["nodes"].items()}
        tree = cls(root=data["root"], nodes=nodes, created_at=data["created_at"])
        tree.validate()
        return tree
