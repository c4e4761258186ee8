from __future__ import annotations

import itertools
from pathlib import Path
from typing import Callable

import pytest

from plankit.curation_engine import CurationEngine, EngineConfig
from plankit.llm_provider import CompletionRequest, CompletionResult, Usage
from plankit.prompt_library import PromptLibrary, default_library
from plankit.session import AblationMode

GOLDEN_DIR = Path(__file__).parent / "golden"

FIXED_TS = "2025-01-01T00:00:00Z"


def fixed_clock() -> str:
    return FIXED_TS


def zero_timer() -> float:
    return 0.0


class ResponderProvider:
    """Test provider driven by a callable; records every request."""

    identity = "mock-responder"

    def __init__(self, responder: Callable[[CompletionRequest], str]) -> None:
        self.responder = responder
        self.transcript: list[tuple[CompletionRequest, str]] = []

    def complete(self, request: CompletionRequest) -> CompletionResult:
        text = self.responder(request)
        self.transcript.append((request, text))
        return CompletionResult(
            text=text, usage=Usage(prompt_chars=request.prompt_chars(), response_chars=len(text))
        )

    def requests_tagged(self, prefix: str) -> list[tuple[CompletionRequest, str]]:
        return [(r, t) for r, t in self.transcript if r.tag.startswith(prefix)]


class StubResponder:
    """Default happy-path responder: well-formed output for every prompt kind.

    Subtask titles come from a global counter so every generated node title
    (and hence every draft key) is unique within a session.
    """

    def __init__(self, detect_answers: Callable[[], bool] | None = None) -> None:
        self._counter = itertools.count(1)
        self._detect_answers = detect_answers

    def __call__(self, request: CompletionRequest) -> str:
        tag = request.tag
        if tag in ("elicit_global", "elicit_draft"):
            a, b = next(self._counter), next(self._counter)
            return f"1. Question number {a}? [file]\n2. Question number {b}?"
        if tag == "generate_subtasks":
            a, b = next(self._counter), next(self._counter)
            return (
                f"1. Task {a} — description {a} — 1 day\n"
                f"2. Task {b} — description {b} — 2 days"
            )
        if tag == "fork_extraction":
            a, b = next(self._counter), next(self._counter)
            return f"1. Entity {a} — work for entity {a} — 1 day\n2. Entity {b} — work for entity {b} — 1 day"
        if tag.startswith("detect_subtask"):
            raw_yes = True if self._detect_answers is None else self._detect_answers()
            return f"Reasoning: stub verdict.\nAnswer: {'Yes' if raw_yes else 'No'}"
        if tag == "fork_decision":
            return "Reasoning: stub fork vote.\nAnswer: Yes"
        if tag.startswith("select_context"):
            # Echo back every key listed in the prompt's context history. The
            # history is embedded mid-sentence, so slice it out first.
            prompt = request.last_user_content()
            marker = "context history from the user: "
            start = prompt.index(marker) + len(marker)
            end = prompt.index(". Please select", start)
            keys = []
            for line in prompt[start:end].splitlines():
                line = line.strip()
                if line.startswith("- "):
                    line = line[2:]
                if line.endswith(")") and " (" in line:
                    keys.append(line[: line.rindex(" (")])
            return "\n".join(f"{k}: relevant" for k in keys) if keys else "nothing relevant"
        if tag in ("generate_draft", "detect_draft", "iterate_draft"):
            return f"Draft text {next(self._counter)}"
        raise AssertionError(f"stub has no response for tag {tag!r}")


@pytest.fixture(scope="session")
def library() -> PromptLibrary:
    return default_library()


@pytest.fixture
def stub_provider() -> ResponderProvider:
    return ResponderProvider(StubResponder())


def make_engine(
    provider,
    mode: AblationMode = AblationMode.FULL_CURATION,
    **config_kwargs,
) -> CurationEngine:
    return CurationEngine(
        provider,
        config=EngineConfig(mode=mode, **config_kwargs),
        clock=fixed_clock,
        timer=zero_timer,
    )
