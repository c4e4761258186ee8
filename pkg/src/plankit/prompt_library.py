"""Parameterized prompt templates and the six subtask-detection strategies.

Templates live as text fixture files under ``templates/``: a front-matter
line declaring the placeholders, then ``--- system ---`` and ``--- user ---``
sections. Placeholder syntax is ``{name}``; ``{{`` and ``}}`` are literal
braces. Substitution is purely literal, so binding values may contain braces
without being reinterpreted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import (
    MissingBinding,
    StrategyInputMismatch,
    UnknownBinding,
    UnreplacedPlaceholder,
)

TEMPLATES_DIR = Path(__file__).parent / "templates"

# The full placeholder vocabulary; every template draws from this set.
PLACEHOLDER_NAMES = frozenset(
    {
        "main_purpose",
        "task_name",
        "task_description",
        "context_history",
        "user_context",
        "tree_outline",
        "level",
        "draft",
        "current_task",
    }
)

# Raw Yes/No polarity of a detection prompt.
YES_MEANS_DECOMPOSE = "yes_means_decompose"
YES_MEANS_ACTIONABLE = "yes_means_actionable"


class TemplateId(str, Enum):
    ELICIT_GLOBAL = "elicit_global"
    ELICIT_DRAFT_ITERATION = "elicit_draft_iteration"
    SELECT_CONTEXT_DRAFT = "select_context_draft"
    SELECT_CONTEXT_FORK = "select_context_fork"
    GENERATE_SUBTASKS = "generate_subtasks"
    DETECT_SUBTASK = "detect_subtask"
    FORK_DECISION = "fork_decision"
    GENERATE_DRAFT = "generate_draft"
    # Authored addition: the entity-extraction turn that fork decomposition needs.
    FORK_EXTRACTION = "fork_extraction"


class DetectionVariant(str, Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"
    FEW_SHOT_COT = "few_shot_cot"
    FEW_SHOT_COT_TREE = "few_shot_cot_tree"
    FEW_SHOT_COT_DRAFT = "few_shot_cot_draft"
    FEW_SHOT_COT_TREE_DRAFT = "few_shot_cot_tree_draft"


# Row order used by evaluation reports.
VARIANT_ORDER = (
    DetectionVariant.ZERO_SHOT,
    DetectionVariant.FEW_SHOT,
    DetectionVariant.FEW_SHOT_COT,
    DetectionVariant.FEW_SHOT_COT_TREE,
    DetectionVariant.FEW_SHOT_COT_DRAFT,
    DetectionVariant.FEW_SHOT_COT_TREE_DRAFT,
)


@dataclass(frozen=True)
class DetectionStrategy:
    variant: DetectionVariant
    includes_level: bool
    includes_draft: bool
    shot_count: int

    def __post_init__(self) -> None:
        name = self.variant.value
        if self.includes_level != ("tree" in name):
            raise ValueError(f"includes_level inconsistent with variant {name!r}")
        if self.includes_draft != ("draft" in name):
            raise ValueError(f"includes_draft inconsistent with variant {name!r}")

    @classmethod
    def for_variant(cls, variant: DetectionVariant | str) -> "DetectionStrategy":
        variant = DetectionVariant(variant)
        name = variant.value
        return cls(
            variant=variant,
            includes_level="tree" in name,
            includes_draft="draft" in name,
            shot_count=0 if variant is DetectionVariant.ZERO_SHOT else 3,
        )

    @property
    def polarity(self) -> str:
        """How a raw Yes maps onto "needs decomposition".

        The plain variants ask whether the task needs to be decomposed; the
        CoT variants ask whether it is specific and actionable, which flips
        the Yes/No meaning.
        """
        if self.variant in (DetectionVariant.ZERO_SHOT, DetectionVariant.FEW_SHOT):
            return YES_MEANS_DECOMPOSE
        return YES_MEANS_ACTIONABLE


# A template text is parsed once into literal / placeholder segments.
_Segment = tuple[str, str]  # ("lit", text) or ("ph", name)

_TOKEN_RE = re.compile(r"\{\{|\}\}|\{([a-z_]+)\}")


def _parse_segments(text: str) -> list[_Segment]:
    segments: list[_Segment] = []
    pos = 0
    for match in _TOKEN_RE.finditer(text):
        if match.start() > pos:
            segments.append(("lit", text[pos : match.start()]))
        token = match.group(0)
        if token == "{{":
            segments.append(("lit", "{"))
        elif token == "}}":
            segments.append(("lit", "}"))
        else:
            name = match.group(1)
            if name not in PLACEHOLDER_NAMES:
                raise UnreplacedPlaceholder(f"unknown placeholder {name!r} in template text")
            segments.append(("ph", name))
        pos = match.end()
    if pos < len(text):
        segments.append(("lit", text[pos:]))
    return segments


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    system_text: str
    user_text: str
    placeholders: frozenset[str]

    def __post_init__(self) -> None:
        found = {
            name
            for kind, name in _parse_segments(self.system_text) + _parse_segments(self.user_text)
            if kind == "ph"
        }
        if found != set(self.placeholders):
            raise UnreplacedPlaceholder(
                f"template {self.id!r}: declared placeholders {sorted(self.placeholders)} "
                f"do not match those found in the text {sorted(found)}"
            )


@dataclass(frozen=True)
class RenderedPrompt:
    system: str
    user: str
    strategy: DetectionStrategy | None = None


def _substitute(text: str, bindings: Mapping[str, str]) -> str:
    parts = []
    for kind, value in _parse_segments(text):
        parts.append(value if kind == "lit" else bindings[value])
    return "".join(parts)


def render(template: PromptTemplate, bindings: Mapping[str, str]) -> RenderedPrompt:
    """Substitute bindings into a template; bindings must cover the declared
    placeholders exactly."""
    for name in sorted(template.placeholders):
        if name not in bindings:
            raise MissingBinding(name)
    for name in sorted(bindings):
        if name not in template.placeholders:
            raise UnknownBinding(name)
    return RenderedPrompt(
        system=_substitute(template.system_text, bindings),
        user=_substitute(template.user_text, bindings),
    )


_FRONT_MATTER_RE = re.compile(r"^placeholders:\s*\[(.*)\]\s*$")
_SYSTEM_MARKER = "--- system ---"
_USER_MARKER = "--- user ---"


def _parse_template_file(template_id: str, text: str) -> PromptTemplate:
    lines = text.splitlines()
    if not lines:
        raise UnreplacedPlaceholder(f"template file for {template_id!r} is empty")
    match = _FRONT_MATTER_RE.match(lines[0].strip())
    if match is None:
        raise UnreplacedPlaceholder(
            f"template {template_id!r}: first line must declare placeholders"
        )
    raw = match.group(1).strip()
    declared = frozenset(p.strip() for p in raw.split(",") if p.strip()) if raw else frozenset()

    body = "\n".join(lines[1:])
    if _SYSTEM_MARKER not in body or _USER_MARKER not in body:
        raise UnreplacedPlaceholder(f"template {template_id!r}: missing system/user sections")
    _, _, after_system = body.partition(_SYSTEM_MARKER)
    system_text, _, user_text = after_system.partition(_USER_MARKER)
    return PromptTemplate(
        id=template_id,
        system_text=system_text.strip("\n"),
        user_text=user_text.strip("\n"),
        placeholders=declared,
    )


class PromptLibrary:
    """All templates, loaded once from fixture files and immutable after."""

    def __init__(
        self,
        templates: dict[str, PromptTemplate],
        detection_variants: dict[DetectionVariant, PromptTemplate],
    ) -> None:
        self._templates = templates
        self._detection_variants = detection_variants

    @classmethod
    def load(cls, directory: Path | str | None = None) -> "PromptLibrary":
        directory = Path(directory) if directory is not None else TEMPLATES_DIR
        templates: dict[str, PromptTemplate] = {}
        for template_id in TemplateId:
            path = directory / f"{template_id.value}.txt"
            templates[template_id.value] = _parse_template_file(
                template_id.value, path.read_text(encoding="utf-8")
            )
        variants: dict[DetectionVariant, PromptTemplate] = {}
        for variant in DetectionVariant:
            path = directory / f"detect_subtask_{variant.value}.txt"
            variants[variant] = _parse_template_file(
                f"detect_subtask_{variant.value}", path.read_text(encoding="utf-8")
            )
        return cls(templates, variants)

    def template(self, template_id: TemplateId | str) -> PromptTemplate:
        return self._templates[TemplateId(template_id).value]

    def render(self, template_id: TemplateId | str, bindings: Mapping[str, str]) -> RenderedPrompt:
        return render(self.template(template_id), bindings)

    def detection_prompt(
        self,
        strategy: DetectionStrategy,
        task_name: str,
        task_description: str,
        level: int | None = None,
        draft: str | None = None,
    ) -> RenderedPrompt:
        """Build the detection prompt for one strategy.

        Tree strategies require the node level, draft strategies require a
        generated draft; anything else is a mismatch.
        """
        if (level is not None) != strategy.includes_level:
            raise StrategyInputMismatch(
                f"strategy {strategy.variant.value!r} "
                f"{'requires' if strategy.includes_level else 'does not take'} a level"
            )
        if (draft is not None) != strategy.includes_draft:
            raise StrategyInputMismatch(
                f"strategy {strategy.variant.value!r} "
                f"{'requires' if strategy.includes_draft else 'does not take'} a draft"
            )
        bindings: dict[str, str] = {
            "task_name": task_name,
            "task_description": task_description,
        }
        if strategy.includes_level:
            bindings["level"] = str(level)
        if strategy.includes_draft:
            bindings["draft"] = draft or ""
        rendered = render(self._detection_variants[strategy.variant], bindings)
        return RenderedPrompt(system=rendered.system, user=rendered.user, strategy=strategy)


_default_library: PromptLibrary | None = None


def default_library() -> PromptLibrary:
    """The bundled templates, loaded lazily and shared."""
    global _default_library
    if _default_library is None:
        _default_library = PromptLibrary.load()
    return _default_library
