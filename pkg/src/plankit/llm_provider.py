"""Provider-neutral chat-completion boundary.

Two implementations share one ``complete()`` contract: a live HTTP client
speaking the common chat-completion wire shape, and a deterministic scripted
mock for tests and offline replay. Response-parsing helpers for the formats
our prompts request live here too.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from .errors import (
    NoValidKeys,
    ProviderHttp,
    ProviderTimeout,
    ScriptExhausted,
    ScriptMismatch,
    UnparseableSubtasks,
    UnparseableVerdict,
)
from .task_graph import SubtaskSpec

logger = logging.getLogger(__name__)

# Request defaults, applied engine-wide.
DEFAULT_TEMPERATURE = 1.0
DEFAULT_MAX_TOKENS = 2048
DEFAULT_TOP_P = 1.0

YES_MEANS_DECOMPOSE = "yes_means_decompose"
YES_MEANS_ACTIONABLE = "yes_means_actionable"


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    top_p: float = DEFAULT_TOP_P
    tag: str = ""

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("at least one message is required")
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be within (0, 1]")

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""

    def prompt_chars(self) -> int:
        return sum(len(m.content) for m in self.messages)


@dataclass(frozen=True)
class Usage:
    prompt_chars: int
    response_chars: int


@dataclass(frozen=True)
class CompletionResult:
    text: str
    usage: Usage


class ChatProvider(Protocol):
    """Anything with a blocking complete(); identity labels eval reports."""

    identity: str

    def complete(self, request: CompletionRequest) -> CompletionResult: ...


# --- deterministic scripted mock ----------------------------------------------


@dataclass
class ScriptStep:
    response: str
    match: str | None = None


class ProviderScript:
    """Ordered scripted responses with optional request-content assertions."""

    def __init__(self, steps: Sequence[ScriptStep]) -> None:
        self.steps = list(steps)
        self.cursor = 0

    @classmethod
    def from_file(cls, path: Path | str) -> "ProviderScript":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        steps = [
            ScriptStep(response=item["response"], match=item.get("match"))
            for item in data["steps"]
        ]
        return cls(steps)

    def remaining(self) -> int:
        return len(self.steps) - self.cursor


class MockProvider:
    """Plays back a script; every request is recorded in ``transcript``."""

    identity = "mock"

    def __init__(self, script: ProviderScript) -> None:
        self.script = script
        self.transcript: list[tuple[CompletionRequest, str]] = []

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if self.script.cursor >= len(self.script.steps):
            raise ScriptExhausted(
                f"script exhausted after {len(self.script.steps)} steps (tag {request.tag!r})"
            )
        step = self.script.steps[self.script.cursor]
        if step.match is not None and step.match not in request.last_user_content():
            raise ScriptMismatch(step.match, detail=f"request tag {request.tag!r}")
        self.script.cursor += 1
        self.transcript.append((request, step.response))
        return CompletionResult(
            text=step.response,
            usage=Usage(prompt_chars=request.prompt_chars(), response_chars=len(step.response)),
        )


# --- live HTTP provider --------------------------------------------------------


@dataclass
class ProviderConfig:
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "PLANKIT_API_KEY"
    timeout_seconds: float = 120.0

    @classmethod
    def from_env(cls) -> "ProviderConfig":
        return cls(
            endpoint=os.environ.get("PLANKIT_ENDPOINT", ""),
            model=os.environ.get("PLANKIT_MODEL", ""),
            api_key_env=os.environ.get("PLANKIT_API_KEY_ENV", "PLANKIT_API_KEY"),
            timeout_seconds=float(os.environ.get("PLANKIT_TIMEOUT_SECONDS", "120")),
        )


class LiveProvider:
    """One blocking chat-completion round trip per call.

    Transient failures (5xx, timeouts, connection errors) are retried once
    after a 2 s backoff; 4xx responses are surfaced immediately.
    """

    RETRY_BACKOFF_SECONDS = 2.0

    def __init__(
        self,
        config: ProviderConfig,
        http: requests.Session | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        if not config.endpoint:
            raise ValueError("provider endpoint is not configured")
        self.config = config
        self.identity = config.model or "live"
        self._http = http or requests.Session()
        self._sleep = sleeper

    def complete(self, request: CompletionRequest) -> CompletionResult:
        payload = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last_error: Exception | None = None
        for attempt in range(2):
            if attempt:
                self._sleep(self.RETRY_BACKOFF_SECONDS)
            try:
                response = self._http.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout_seconds,
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = ProviderHttp(response.status_code, response.text[:200])
                continue
            if response.status_code >= 400:
                raise ProviderHttp(response.status_code, response.text[:200])
            try:
                body = response.json()
                text = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                raise ProviderHttp(response.status_code, "malformed completion body") from None
            return CompletionResult(
                text=text,
                usage=Usage(prompt_chars=request.prompt_chars(), response_chars=len(text)),
            )

        if isinstance(last_error, ProviderHttp):
            raise last_error
        raise ProviderTimeout(f"provider unreachable after retry: {last_error}")


# --- response parsing -----------------------------------------------------------

_NUMBERED_ITEM_RE = re.compile(r"^\s*\d+[.)]\s+(.*\S)\s*$")
_ANSWER_LINE_RE = re.compile(r"^\s*answer\s*:\s*(yes|no)\b", re.IGNORECASE)
_LEADING_TOKEN_RE = re.compile(r"^\W*(yes|no)\b", re.IGNORECASE)


def parse_subtask_list(text: str) -> list[SubtaskSpec]:
    """Parse numbered "Title — Description — Duration" items.

    Prose around the list is ignored; a missing duration degrades to
    "unspecified". Items reduced to an empty title are dropped.
    """
    items: list[SubtaskSpec] = []
    for line in text.splitlines():
        match = _NUMBERED_ITEM_RE.match(line)
        if match is None:
            continue
        body = match.group(1)
        fields = [f.strip() for f in re.split(r"\s*—\s*", body, maxsplit=2)]
        if len(fields) == 1 and " - " in body:
            fields = [f.strip() for f in body.split(" - ", 2)]
        title = fields[0]
        if not title:
            continue
        description = fields[1] if len(fields) > 1 else ""
        duration = fields[2] if len(fields) > 2 and fields[2] else "unspecified"
        items.append(SubtaskSpec(title=title, description=description, estimated_duration=duration))
    if not items:
        raise UnparseableSubtasks("no numbered subtask items found")
    return items


@dataclass(frozen=True)
class YesNoVerdict:
    needs_decomposition: bool
    reasoning: str


def parse_yes_no(text: str, polarity: str) -> YesNoVerdict:
    """Extract the Yes/No verdict and map it through the prompt's polarity.

    Reasoning-first responses end with an "Answer: Yes|No" line; bare
    responses lead with the token.
    """
    if polarity not in (YES_MEANS_DECOMPOSE, YES_MEANS_ACTIONABLE):
        raise ValueError(f"unknown polarity {polarity!r}")

    lines = text.splitlines()
    raw_yes: bool | None = None
    reasoning = ""
    for index in range(len(lines) - 1, -1, -1):
        match = _ANSWER_LINE_RE.match(lines[index])
        if match is not None:
            raw_yes = match.group(1).lower() == "yes"
            reasoning = "\n".join(lines[:index]).strip()
            break
    if raw_yes is None:
        match = _LEADING_TOKEN_RE.match(text)
        if match is not None:
            raw_yes = match.group(1).lower() == "yes"
            reasoning = ""
    if raw_yes is None:
        raise UnparseableVerdict(f"no Yes/No verdict in response: {text[:80]!r}")

    needs = raw_yes if polarity == YES_MEANS_DECOMPOSE else not raw_yes
    return YesNoVerdict(needs_decomposition=needs, reasoning=reasoning)


@dataclass(frozen=True)
class KeySelection:
    key: str
    reason: str


def _clean_key_fragment(fragment: str) -> str:
    fragment = fragment.strip()
    fragment = re.sub(r"^[-*]\s+", "", fragment)
    fragment = re.sub(r"^\d+[.)]\s+", "", fragment)
    return fragment.strip().strip("<>").strip()


def parse_key_selection(text: str, valid_keys: Sequence[str]) -> list[KeySelection]:
    """Extract "key: reason" lines, matching keys case-insensitively.

    Unmatched lines are dropped with a warning; duplicates keep the first
    reason. Raises when nothing in the response names a valid key.
    """
    if not valid_keys:
        raise NoValidKeys("no candidate keys to select from")
    # Longest-first so keys that prefix one another match correctly, and keys
    # containing colons are handled before the naive split.
    ordered = sorted(valid_keys, key=len, reverse=True)
    canonical = {key.casefold(): key for key in valid_keys}

    selections: list[KeySelection] = []
    seen: set[str] = set()
    for line in text.splitlines():
        cleaned = _clean_key_fragment(line)
        if not cleaned:
            continue
        matched: str | None = None
        reason = ""
        folded = cleaned.casefold()
        for key in ordered:
            prefix = key.casefold()
            if folded.startswith(prefix):
                rest = cleaned[len(key) :].lstrip()
                if not rest or rest.startswith(":"):
                    matched = key
                    reason = rest[1:].strip() if rest.startswith(":") else ""
                    break
        if matched is None and ":" in cleaned:
            head, _, tail = cleaned.partition(":")
            candidate = _clean_key_fragment(head).casefold()
            if candidate in canonical:
                matched = canonical[candidate]
                reason = tail.strip()
        if matched is None:
            if ":" in cleaned:
                logger.warning("selection response line names no valid key: %r", cleaned)
            continue
        if matched in seen:
            continue
        seen.add(matched)
        selections.append(KeySelection(key=matched, reason=reason))
    if not selections:
        raise NoValidKeys("selection response named no valid keys")
    return selections
