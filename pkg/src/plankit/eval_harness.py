"""Benchmark harness for the six subtask-detection prompting strategies.

Runs each strategy over a labeled suite of task cases, repeated-runs style,
and reports per-strategy accuracy (mean and SD across runs) plus a
machine-readable per-case CSV. Draft-based strategies generate their embedded
draft once per case per run, never cached across strategies.
"""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import MalformedSuite, PlanningError, UnparseableVerdict
from .llm_provider import (
    ChatMessage,
    ChatProvider,
    CompletionRequest,
    CompletionResult,
    Usage,
    parse_yes_no,
)
from .prompt_library import (
    VARIANT_ORDER,
    DetectionStrategy,
    DetectionVariant,
    PromptLibrary,
    TemplateId,
    default_library,
)
from .session import utc_now_iso

SUITE_PATH = Path(__file__).parent / "data" / "detection_suite.txt"

SCENARIOS = ("academic", "practical", "recreational", "travel")

# Each scenario's framing goal, used when a draft has to be generated for a case.
SCENARIO_GOALS = {
    "academic": "Apply for a PhD program",
    "practical": "Obtain a driver's license",
    "recreational": "Find a surfing camp",
    "travel": "Arrange a trip abroad",
}


@dataclass(frozen=True)
class TestCase:
    id: str
    scenario: str
    title: str
    description: str
    level: int
    gold_label: bool  # True: needs decomposition


def load_suite(path: Path | str = SUITE_PATH) -> list[TestCase]:
    """Parse the pipe-delimited suite file.

    Line format: id|scenario|title|description|level|gold_label. Blank lines
    and '#' comments are skipped.
    """
    cases: list[TestCase] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 6:
            raise MalformedSuite(line_no, f"expected 6 fields, got {len(fields)}")
        case_id, scenario, title, description, level_text, label_text = fields
        if not case_id or case_id in seen_ids:
            raise MalformedSuite(line_no, f"missing or duplicate case id {case_id!r}")
        if scenario not in SCENARIOS:
            raise MalformedSuite(line_no, f"unknown scenario {scenario!r}")
        if not title or not description:
            raise MalformedSuite(line_no, "title and description are required")
        try:
            level = int(level_text)
        except ValueError:
            raise MalformedSuite(line_no, f"level {level_text!r} is not an integer") from None
        if label_text.casefold() not in ("true", "false"):
            raise MalformedSuite(line_no, f"gold_label {label_text!r} must be true or false")
        seen_ids.add(case_id)
        cases.append(
            TestCase(
                id=case_id,
                scenario=scenario,
                title=title,
                description=description,
                level=level,
                gold_label=label_text.casefold() == "true",
            )
        )
    return cases


@dataclass
class CaseRecord:
    strategy: str
    run: int
    case_id: str
    predicted: bool | None  # None when the verdict was unusable
    gold: bool
    correct: bool
    unparseable: bool


@dataclass
class StrategyStats:
    mean_accuracy: float
    stddev: float
    runs: int
    unparseable: int = 0


@dataclass
class EvalReport:
    strategies: dict[str, StrategyStats]
    records: list[CaseRecord] = field(default_factory=list)
    provider_identity: str = ""
    timestamp: str = ""


def _evaluate_case(
    case: TestCase,
    strategy: DetectionStrategy,
    run: int,
    provider: ChatProvider,
    library: PromptLibrary,
) -> CaseRecord:
    try:
        draft = None
        if strategy.includes_draft:
            rendered = library.render(
                TemplateId.GENERATE_DRAFT,
                {
                    "main_purpose": SCENARIO_GOALS[case.scenario],
                    "user_context": "(no context)",
                    "current_task": case.title,
                    "task_description": case.description,
                },
            )
            draft = provider.complete(
                CompletionRequest(
                    messages=(
                        ChatMessage("system", rendered.system),
                        ChatMessage("user", rendered.user),
                    ),
                    tag="eval_draft",
                )
            ).text
        prompt = library.detection_prompt(
            strategy,
            case.title,
            case.description,
            level=case.level if strategy.includes_level else None,
            draft=draft,
        )
        response = provider.complete(
            CompletionRequest(
                messages=(
                    ChatMessage("system", prompt.system),
                    ChatMessage("user", prompt.user),
                ),
                tag=f"detect_subtask:{strategy.variant.value}",
            )
        )
        verdict = parse_yes_no(response.text, strategy.polarity)
        predicted: bool | None = verdict.needs_decomposition
        return CaseRecord(
            strategy=strategy.variant.value,
            run=run,
            case_id=case.id,
            predicted=predicted,
            gold=case.gold_label,
            correct=predicted == case.gold_label,
            unparseable=False,
        )
    except (UnparseableVerdict, PlanningError):
        # A broken verdict or provider failure scores as wrong for this case
        # but never aborts the run.
        return CaseRecord(
            strategy=strategy.variant.value,
            run=run,
            case_id=case.id,
            predicted=None,
            gold=case.gold_label,
            correct=False,
            unparseable=True,
        )


def run_eval(
    suite: Sequence[TestCase],
    strategies: Sequence[DetectionVariant | str],
    runs: int,
    provider: ChatProvider,
    library: PromptLibrary | None = None,
    parallelism: int = 4,
    clock=None,
) -> EvalReport:
    """Score every strategy x run x case combination against the provider.

    Cases within a run execute concurrently up to `parallelism`; record
    order stays deterministic (case order). Pass 1 for stateful scripted
    providers, whose cursor must advance sequentially.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if not suite:
        raise ValueError("suite must not be empty")
    library = library or default_library()
    clock = clock or utc_now_iso

    report = EvalReport(
        strategies={},
        provider_identity=getattr(provider, "identity", type(provider).__name__),
        timestamp=clock(),
    )
    for variant in strategies:
        strategy = DetectionStrategy.for_variant(variant)
        run_accuracies: list[float] = []
        unparseable_total = 0
        for run in range(1, runs + 1):
            if parallelism > 1:
                with ThreadPoolExecutor(max_workers=parallelism) as pool:
                    records = list(
                        pool.map(
                            lambda case: _evaluate_case(case, strategy, run, provider, library),
                            suite,
                        )
                    )
            else:
                records = [
                    _evaluate_case(case, strategy, run, provider, library) for case in suite
                ]
            correct = sum(1 for r in records if r.correct)
            unparseable_total += sum(1 for r in records if r.unparseable)
            run_accuracies.append(correct / len(suite))
            report.records.extend(records)
        mean = statistics.fmean(run_accuracies)
        stddev = statistics.stdev(run_accuracies) if len(run_accuracies) > 1 else 0.0
        report.strategies[strategy.variant.value] = StrategyStats(
            mean_accuracy=mean, stddev=stddev, runs=runs, unparseable=unparseable_total
        )
    return report


def render_report(report: EvalReport) -> str:
    """Fixed-order text table: plain baselines first, then the CoT variants."""
    header = f"{'strategy':<28}{'mean':>8}{'sd':>8}{'runs':>6}{'unparseable':>13}"
    lines = [header, "-" * len(header)]
    for variant in VARIANT_ORDER:
        stats = report.strategies.get(variant.value)
        if stats is None:
            continue
        lines.append(
            f"{variant.value:<28}"
            f"{stats.mean_accuracy:>8.2f}"
            f"{stats.stddev:>8.2f}"
            f"{stats.runs:>6d}"
            f"{stats.unparseable:>13d}"
        )
    if report.provider_identity:
        lines.append(f"provider: {report.provider_identity}  at: {report.timestamp}")
    return "\n".join(lines)


def write_csv(report: EvalReport, path: Path | str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["strategy", "run", "case_id", "predicted", "gold", "correct", "unparseable"])
        for r in report.records:
            writer.writerow(
                [
                    r.strategy,
                    r.run,
                    r.case_id,
                    "" if r.predicted is None else str(r.predicted).lower(),
                    str(r.gold).lower(),
                    str(r.correct).lower(),
                    str(r.unparseable).lower(),
                ]
            )


# --- offline providers for harness runs -------------------------------------------


class OracleProvider:
    """Answers every detection request correctly from the suite's labels.

    Detection requests are matched to their case by title; the reply format
    and Yes/No polarity follow the strategy named in the request tag. Useful
    as a known-perfect upper bound for pipeline verification.
    """

    identity = "mock-oracle"

    def __init__(self, suite: Sequence[TestCase]) -> None:
        self._suite = list(suite)
        self.transcript: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> CompletionResult:
        self.transcript.append(request)
        if request.tag == "eval_draft":
            text = "A concise working draft addressing the task."
            return self._result(request, text)
        if not request.tag.startswith("detect_subtask:"):
            raise ValueError(f"oracle cannot answer request tagged {request.tag!r}")
        strategy = DetectionStrategy.for_variant(request.tag.split(":", 1)[1])
        prompt = request.last_user_content()
        case = next(
            (c for c in self._suite if f"working on the task {c.title}:" in prompt), None
        )
        if case is None:
            raise ValueError("oracle found no suite case in the request")
        raw_yes = case.gold_label if strategy.polarity == "yes_means_decompose" else not case.gold_label
        word = "Yes" if raw_yes else "No"
        if strategy.variant in (DetectionVariant.ZERO_SHOT, DetectionVariant.FEW_SHOT):
            text = word
        else:
            text = f"Reasoning: oracle verdict for {case.id}.\nAnswer: {word}"
        return self._result(request, text)

    @staticmethod
    def _result(request: CompletionRequest, text: str) -> CompletionResult:
        return CompletionResult(
            text=text, usage=Usage(prompt_chars=request.prompt_chars(), response_chars=len(text))
        )


class ConstantProvider:
    """Replies with one fixed text, whatever the request."""

    def __init__(self, text: str, identity: str = "mock-constant") -> None:
        self.text = text
        self.identity = identity
        self.transcript: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> CompletionResult:
        self.transcript.append(request)
        return CompletionResult(
            text=self.text,
            usage=Usage(prompt_chars=request.prompt_chars(), response_chars=len(self.text)),
        )
