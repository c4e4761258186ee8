from __future__ import annotations

import json
import socket
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plankit.errors import (
    NoValidKeys,
    ProviderHttp,
    ProviderTimeout,
    ScriptExhausted,
    ScriptMismatch,
    UnparseableSubtasks,
    UnparseableVerdict,
)
from plankit.llm_provider import (
    ChatMessage,
    CompletionRequest,
    LiveProvider,
    MockProvider,
    ProviderConfig,
    ProviderScript,
    ScriptStep,
    parse_key_selection,
    parse_subtask_list,
    parse_yes_no,
)


def request_for(*contents: str, tag: str = "t") -> CompletionRequest:
    messages = [ChatMessage("system", "sys")]
    messages += [ChatMessage("user", c) for c in contents]
    return CompletionRequest(messages=tuple(messages), tag=tag)


class TestRequestValidation:
    def test_defaults_match_engine_settings(self):
        request = request_for("hello")
        assert request.temperature == 1.0
        assert request.max_tokens == 2048
        assert request.top_p == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"temperature": -0.1},
            {"temperature": 2.5},
            {"max_tokens": 0},
            {"top_p": 0.0},
            {"top_p": 1.5},
        ],
    )
    def test_parameter_bounds(self, kwargs):
        with pytest.raises(ValueError):
            CompletionRequest(messages=(ChatMessage("user", "x"),), **kwargs)

    def test_empty_system_content_rejected(self):
        with pytest.raises(ValueError):
            ChatMessage("system", "")

    def test_assistant_content_may_be_empty(self):
        ChatMessage("assistant", "")


class TestMockProvider:
    def test_scripted_echo(self):
        script = ProviderScript([ScriptStep(response="1. item", match="main purpose")])
        provider = MockProvider(script)
        result = provider.complete(request_for("tell me about the main purpose here"))
        assert result.text == "1. item"
        assert result.usage.response_chars == len("1. item")

    def test_exhausted(self):
        provider = MockProvider(ProviderScript([ScriptStep(response="only one")]))
        provider.complete(request_for("a"))
        with pytest.raises(ScriptExhausted):
            provider.complete(request_for("b"))

    def test_mismatch(self):
        provider = MockProvider(ProviderScript([ScriptStep(response="r", match="expected words")]))
        with pytest.raises(ScriptMismatch):
            provider.complete(request_for("something else entirely"))

    def test_determinism(self):
        steps = [ScriptStep(response=f"r{i}") for i in range(4)]
        outputs = []
        for _ in range(2):
            provider = MockProvider(ProviderScript(list(steps)))
            run = [provider.complete(request_for(f"m{i}")) for i in range(4)]
            outputs.append([(r.text, r.usage) for r in run])
        assert outputs[0] == outputs[1]

    def test_transcript_records_requests(self):
        provider = MockProvider(ProviderScript([ScriptStep(response="r")]))
        provider.complete(request_for("hello", tag="generate_draft"))
        assert len(provider.transcript) == 1
        request, response = provider.transcript[0]
        assert request.tag == "generate_draft"
        assert response == "r"

    def test_script_from_file(self, tmp_path):
        path = tmp_path / "script.json"
        path.write_text(
            json.dumps({"steps": [{"match": "m", "response": "r"}, {"response": "s"}]}),
            encoding="utf-8",
        )
        script = ProviderScript.from_file(path)
        assert [s.match for s in script.steps] == ["m", None]


class TestParseSubtaskList:
    def test_two_items(self):
        text = (
            "1. Research Universities and Programs — identify NLP programs — 1 week\n"
            "2. Identify Faculty Members — find matching faculty — 1 week"
        )
        items = parse_subtask_list(text)
        assert len(items) == 2
        assert items[0].title == "Research Universities and Programs"
        assert items[0].description == "identify NLP programs"
        assert items[0].estimated_duration == "1 week"

    def test_surrounding_prose_ignored(self):
        text = "Sure, here is the breakdown:\n1. A — a — 1 day\nHope this helps!"
        items = parse_subtask_list(text)
        assert [i.title for i in items] == ["A"]

    def test_missing_duration_defaults(self):
        items = parse_subtask_list("1. A — only a description")
        assert items[0].estimated_duration == "unspecified"

    def test_title_only(self):
        items = parse_subtask_list("1. Just a title")
        assert items[0].title == "Just a title"
        assert items[0].description == ""

    def test_hyphen_fallback(self):
        items = parse_subtask_list("1. Title - description - 2 days")
        assert items[0].title == "Title"
        assert items[0].estimated_duration == "2 days"

    def test_empty_input(self):
        with pytest.raises(UnparseableSubtasks):
            parse_subtask_list("")

    def test_no_numbered_lines(self):
        with pytest.raises(UnparseableSubtasks):
            parse_subtask_list("no list here, sorry")

    @settings(max_examples=80, deadline=None)
    @given(st.text(max_size=300))
    def test_never_returns_empty_titles(self, text):
        try:
            items = parse_subtask_list(text)
        except UnparseableSubtasks:
            return
        assert all(i.title for i in items)


class TestParseYesNo:
    def test_answer_line_decompose_polarity(self):
        verdict = parse_yes_no("Answer: No", "yes_means_decompose")
        assert verdict.needs_decomposition is False

    def test_answer_line_actionable_polarity_inverts(self):
        verdict = parse_yes_no("Answer: Yes", "yes_means_actionable")
        assert verdict.needs_decomposition is False
        verdict = parse_yes_no("Answer: No", "yes_means_actionable")
        assert verdict.needs_decomposition is True

    def test_reasoning_captured(self):
        text = "The task is broad.\nIt has many parts.\nAnswer: Yes"
        verdict = parse_yes_no(text, "yes_means_decompose")
        assert verdict.reasoning == "The task is broad.\nIt has many parts."
        assert verdict.needs_decomposition is True

    def test_leading_token(self):
        assert parse_yes_no("Yes", "yes_means_decompose").needs_decomposition is True
        assert parse_yes_no("no, it is fine", "yes_means_decompose").needs_decomposition is False

    def test_last_answer_line_wins(self):
        text = "Answer: Yes\nwait, reconsidering\nAnswer: No"
        assert parse_yes_no(text, "yes_means_decompose").needs_decomposition is False

    @pytest.mark.parametrize("text", ["maybe", "", "the answer is unclear", "yesterday"])
    def test_unparseable(self, text):
        with pytest.raises(UnparseableVerdict):
            parse_yes_no(text, "yes_means_decompose")


class TestParseKeySelection:
    VALID = ["University List", "CV"]

    def test_single_match_with_reason(self):
        got = parse_key_selection(
            "University List: needed to enumerate programs", self.VALID
        )
        assert [(s.key, s.reason) for s in got] == [
            ("University List", "needed to enumerate programs")
        ]

    def test_case_insensitive(self):
        got = parse_key_selection("university list: why not", self.VALID)
        assert got[0].key == "University List"

    def test_response_order_preserved(self):
        got = parse_key_selection("CV: resume\nUniversity List: schools", self.VALID)
        assert [s.key for s in got] == ["CV", "University List"]

    def test_invalid_keys_only(self):
        with pytest.raises(NoValidKeys):
            parse_key_selection("Shopping List: nope", self.VALID)

    def test_empty_valid_keys(self):
        with pytest.raises(NoValidKeys):
            parse_key_selection("CV: anything", [])

    def test_duplicates_keep_first_reason(self):
        got = parse_key_selection("CV: first\nCV: second", self.VALID)
        assert [(s.key, s.reason) for s in got] == [("CV", "first")]

    def test_key_containing_colon(self):
        valid = ["Outreach: Prof. Blake White — draft", "CV"]
        got = parse_key_selection(
            "Outreach: Prof. Blake White — draft: records the shared paper", valid
        )
        assert got[0].key == "Outreach: Prof. Blake White — draft"
        assert got[0].reason == "records the shared paper"

    def test_decorations_stripped(self):
        got = parse_key_selection("- <CV>: background info", self.VALID)
        assert got[0].key == "CV"

    def test_prose_lines_ignored(self):
        text = "I recommend these keys:\nCV: background\nThanks!"
        got = parse_key_selection(text, self.VALID)
        assert [s.key for s in got] == ["CV"]


# --- live provider over a local HTTP server ------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    behaviors: list[str] = []
    seen: list[dict] = []

    def do_POST(self):  # noqa: N802 (stdlib naming)
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length) or b"{}")
        type(self).seen.append(
            {"body": body, "auth": self.headers.get("Authorization", "")}
        )
        behavior = type(self).behaviors.pop(0) if type(self).behaviors else "ok"
        if behavior == "500":
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"boom")
            return
        if behavior == "404":
            self.send_response(404)
            self.end_headers()
            self.wfile.write(b"not here")
            return
        if behavior == "garbage":
            payload = b'{"weird": true}'
        else:
            payload = json.dumps(
                {"choices": [{"message": {"role": "assistant", "content": "live reply"}}]}
            ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):  # silence test output
        pass


@pytest.fixture
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    _Handler.behaviors = []
    _Handler.seen = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions", _Handler
    server.shutdown()


def live_provider(endpoint: str, sleeps: list[float]) -> LiveProvider:
    config = ProviderConfig(
        endpoint=endpoint, model="test-model", api_key_env="TEST_PROVIDER_KEY", timeout_seconds=2.0
    )
    return LiveProvider(config, sleeper=sleeps.append)


class TestLiveProvider:
    def test_round_trip_and_wire_shape(self, http_server, monkeypatch):
        endpoint, handler = http_server
        monkeypatch.setenv("TEST_PROVIDER_KEY", "sk-test")
        provider = live_provider(endpoint, [])
        result = provider.complete(request_for("hello there", tag="generate_draft"))
        assert result.text == "live reply"
        body = handler.seen[0]["body"]
        assert body["model"] == "test-model"
        assert body["messages"][0] == {"role": "system", "content": "sys"}
        assert body["messages"][1] == {"role": "user", "content": "hello there"}
        assert (body["temperature"], body["top_p"], body["max_tokens"]) == (1.0, 1.0, 2048)
        assert handler.seen[0]["auth"] == "Bearer sk-test"

    def test_retries_once_on_500(self, http_server):
        endpoint, handler = http_server
        handler.behaviors = ["500"]
        sleeps: list[float] = []
        provider = live_provider(endpoint, sleeps)
        result = provider.complete(request_for("x"))
        assert result.text == "live reply"
        assert sleeps == [LiveProvider.RETRY_BACKOFF_SECONDS]
        assert len(handler.seen) == 2

    def test_persistent_500_raises(self, http_server):
        endpoint, handler = http_server
        handler.behaviors = ["500", "500"]
        with pytest.raises(ProviderHttp) as excinfo:
            live_provider(endpoint, []).complete(request_for("x"))
        assert excinfo.value.status == 500

    def test_4xx_not_retried(self, http_server):
        endpoint, handler = http_server
        handler.behaviors = ["404"]
        with pytest.raises(ProviderHttp) as excinfo:
            live_provider(endpoint, []).complete(request_for("x"))
        assert excinfo.value.status == 404
        assert len(handler.seen) == 1

    def test_malformed_body(self, http_server):
        endpoint, handler = http_server
        handler.behaviors = ["garbage"]
        with pytest.raises(ProviderHttp):
            live_provider(endpoint, []).complete(request_for("x"))

    def test_unreachable_endpoint_times_out(self):
        # A bound-but-never-accepting socket forces a connect timeout.
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(0)
        port = blocker.getsockname()[1]
        blocker.close()  # now nothing listens on this port
        config = ProviderConfig(endpoint=f"http://127.0.0.1:{port}/v1", timeout_seconds=0.2)
        sleeps: list[float] = []
        provider = LiveProvider(config, sleeper=sleeps.append)
        with pytest.raises(ProviderTimeout):
            provider.complete(request_for("x"))
        assert sleeps == [LiveProvider.RETRY_BACKOFF_SECONDS]

    def test_endpoint_required(self):
        with pytest.raises(ValueError):
            LiveProvider(ProviderConfig(endpoint=""))
