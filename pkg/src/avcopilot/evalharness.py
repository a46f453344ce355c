"""Desk-scale reproduction of the two experiments.

Translation eval: exact-match accuracy of the backend's canonical DSL
output against a ground-truth corpus, with per-category accuracy, an error
breakdown (category / action / parameter level), latency statistics and
boxplot-ready summaries (1.5*IQR whiskers).

Scenario eval: N scripted runs of a schedule; a run succeeds only if every
scheduled instruction ends SUCCESS.  Reports the task success rate and
execution/feedback latency statistics.

Corpus file format: blank-line separated blocks of ::

    id: <ident>
    instruction: <text>
      <DSL document indented by two spaces>

Accuracy is reported both as an exact fraction and as a percentage, so the
effective denominator is never ambiguous.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .dsl import Category, ExtractedCommand, parse_command, serialize_command
from .interface_node import validate
from .pipeline import Pipeline, ScheduleEntry, ScenarioResult
from .registry import ActionRegistry
from .translation import (
    AblationMode,
    IclExample,
    TranslationBackend,
    TranslationError,
    assemble_prompt,
    default_icl_examples,
    default_knowledge_base,
)


class EvalError(RuntimeError):
    pass


# Reported reference measurements of this architecture with a cloud-hosted
# LLM backend on a 200-pair corpus; included in reports as a comparison
# anchor.  Offline backends are not expected to reproduce these numbers.
CLOUD_BASELINE_REFERENCE = {
    "backend": "cloud-llm",
    "n": 200,
    "accuracy_pct": 97.0,
    "latency_s": {"mean": 1.723, "median": 1.669},
}


@dataclass(frozen=True)
class CorpusEntry:
    entry_id: str
    instruction: str
    truth_dsl: str  # canonical document

    @property
    def truth_command(self) -> ExtractedCommand:
        return parse_command(self.truth_dsl)

    @property
    def category_token(self) -> str:
        return self.truth_command.category.value


def load_corpus(text: str, registry: ActionRegistry | None = None) -> tuple[CorpusEntry, ...]:
    """Parse a corpus file; every ground truth must parse (and validate)."""
    entries: list[CorpusEntry] = []
    seen_ids: set[str] = set()
    for block in text.split("\n\n"):
        lines = [l for l in block.split("\n") if l.strip() and not l.startswith("#")]
        if not lines:
            continue
        if not lines[0].startswith("id: ") or len(lines) < 3:
            raise EvalError(f"malformed corpus block starting {lines[0]!r}")
        entry_id = lines[0][len("id: ") :].strip()
        if entry_id in seen_ids:
            raise EvalError(f"duplicate corpus id {entry_id!r}")
        seen_ids.add(entry_id)
        if not lines[1].startswith("instruction: "):
            raise EvalError(f"corpus block {entry_id}: missing instruction line")
        instruction = lines[1][len("instruction: ") :]
        doc_lines = []
        for line in lines[2:]:
            if not line.startswith("  "):
                raise EvalError(f"corpus block {entry_id}: DSL must be indented two spaces")
            doc_lines.append(line[2:])
        doc = "\n".join(doc_lines) + "\n"
        cmd = parse_command(doc)
        canonical = serialize_command(cmd)
        if canonical != doc:
            raise EvalError(f"corpus block {entry_id}: ground truth is not canonical")
        if registry is not None and cmd.category is not Category.OUT_OF_SCOPE:
            verdict = validate(cmd, registry)
            if not verdict.accepted:
                raise EvalError(
                    f"corpus block {entry_id}: ground truth does not validate: {verdict.detail}"
                )
        entries.append(CorpusEntry(entry_id, instruction, doc))
    if not entries:
        raise EvalError("empty corpus")
    return tuple(entries)


def default_corpus(registry: ActionRegistry | None = None) -> tuple[CorpusEntry, ...]:
    from importlib.resources import files

    return load_corpus(
        files("avcopilot.data").joinpath("corpus.txt").read_text(encoding="utf-8"), registry
    )


# --------------------------------------------------------------- statistics

def latency_stats(values: list[float]) -> dict[str, float]:
    """Mean, median and population standard deviation of raw latencies."""
    if not values:
        return {"mean": 0.0, "median": 0.0, "std": 0.0}
    return {
        "mean": statistics.fmean(values),
        "median": statistics.median(values),
        "std": statistics.pstdev(values),
    }


def boxplot_summary(values: list[float]) -> dict[str, object]:
    """Five-number summary with 1.5*IQR whiskers and explicit outliers."""
    if not values:
        raise EvalError("boxplot of an empty sample")
    data = sorted(values)
    if len(data) == 1:
        q1 = q2 = q3 = data[0]
    else:
        q1, q2, q3 = statistics.quantiles(data, n=4, method="inclusive")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [v for v in data if lo_fence <= v <= hi_fence]
    outliers = [v for v in data if v < lo_fence or v > hi_fence]
    return {
        "lower_whisker": inside[0],
        "q1": q1,
        "median": q2,
        "q3": q3,
        "upper_whisker": inside[-1],
        "outliers": outliers,
        "n": len(data),
    }


# --------------------------------------------------------- translation eval

@dataclass(frozen=True)
class EvalCase:
    entry: CorpusEntry
    predicted_dsl: str | None
    error_kind: str | None
    latency_s: float

    @property
    def correct(self) -> bool:
        return self.predicted_dsl == self.entry.truth_dsl


@dataclass
class EvalStats:
    n: int
    correct: int
    accuracy_pct: float
    mean_s: float
    median_s: float
    std_s: float
    per_category: dict[str, dict[str, int]]
    error_breakdown: dict[str, int]
    latencies_s: list[float]
    ablation: str
    backend: str

    @property
    def accuracy_fraction(self) -> str:
        return f"{self.correct}/{self.n}"

    def as_dict(self) -> dict[str, object]:
        return {
            "n": self.n,
            "correct": self.correct,
            "accuracy_fraction": self.accuracy_fraction,
            "accuracy_pct": self.accuracy_pct,
            "latency_s": {"mean": self.mean_s, "median": self.median_s, "std": self.std_s},
            "per_category": self.per_category,
            "error_breakdown": self.error_breakdown,
            "ablation": self.ablation,
            "backend": self.backend,
            "reference_cloud_baseline": CLOUD_BASELINE_REFERENCE,
        }


def classify_error(truth: ExtractedCommand, predicted: ExtractedCommand | None) -> str:
    """Attribute a mismatch to the category, action or parameter level."""
    if predicted is None:
        return "translation_failed"
    if predicted.category is not truth.category:
        return "category_level"
    if predicted.action != truth.action:
        return "action_level"
    return "parameter_level"


def run_translation_eval(
    corpus: tuple[CorpusEntry, ...],
    backend: TranslationBackend,
    ablation: AblationMode = AblationMode.BASELINE,
    kb: str | None = None,
    icl: tuple[IclExample, ...] | None = None,
    status_text: str | None = None,
) -> tuple[EvalStats, list[EvalCase]]:
    """Score exact-match accuracy; latencies time the translate call only."""
    if not corpus:
        raise EvalError("empty corpus")
    kb = kb if kb is not None else default_knowledge_base()
    icl = icl if icl is not None else default_icl_examples()

    cases: list[EvalCase] = []
    for entry in corpus:
        bundle = assemble_prompt(kb, status_text, icl, entry.instruction, ablation)
        started = time.perf_counter()
        predicted_dsl: str | None = None
        error_kind: str | None = None
        try:
            predicted = backend.translate(bundle)
            predicted_dsl = serialize_command(predicted)
        except TranslationError as exc:
            error_kind = exc.kind
        latency = time.perf_counter() - started
        cases.append(EvalCase(entry, predicted_dsl, error_kind, latency))

    per_category: dict[str, dict[str, int]] = {}
    breakdown = {
        "category_level": 0,
        "action_level": 0,
        "parameter_level": 0,
        "translation_failed": 0,
    }
    correct = 0
    for case in cases:
        bucket = per_category.setdefault(case.entry.category_token, {"n": 0, "correct": 0})
        bucket["n"] += 1
        if case.correct:
            correct += 1
            bucket["correct"] += 1
        else:
            predicted = parse_command(case.predicted_dsl) if case.predicted_dsl else None
            breakdown[classify_error(case.entry.truth_command, predicted)] += 1

    latencies = [case.latency_s for case in cases]
    stats = latency_stats(latencies)
    eval_stats = EvalStats(
        n=len(cases),
        correct=correct,
        accuracy_pct=100.0 * correct / len(cases),
        mean_s=stats["mean"],
        median_s=stats["median"],
        std_s=stats["std"],
        per_category=per_category,
        error_breakdown=breakdown,
        latencies_s=latencies,
        ablation=ablation.value,
        backend=getattr(backend, "name", backend.__class__.__name__),
    )
    return eval_stats, cases


def format_stats_table(rows: list[EvalStats]) -> str:
    """Render accuracy/latency rows in the ablation-table layout."""
    header = f"{'Experiment':<12} {'Status':^8} {'ICL':^5} {'Acc. in %':>10} {'mean t_r in s':>14} {'median t_r in s':>16}"
    lines = [header, "-" * len(header)]
    for stats in rows:
        mode = AblationMode(stats.ablation)
        lines.append(
            f"{mode.value:<12} {'yes' if mode.includes_status else 'no':^8} "
            f"{'yes' if mode.includes_icl else 'no':^5} {stats.accuracy_pct:>10.1f} "
            f"{stats.mean_s:>14.3f} {stats.median_s:>16.3f}"
        )
    return "\n".join(lines) + "\n"


def write_translation_outputs(out_dir: str | Path, stats: EvalStats, cases: list[EvalCase]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "translation_stats.json").write_text(
        json.dumps(stats.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    (out / "translation_boxplot.json").write_text(
        json.dumps(boxplot_summary(stats.latencies_s), indent=2) + "\n", encoding="utf-8"
    )
    (out / "translation_latencies.txt").write_text(
        "".join(f"{v:.9f}\n" for v in stats.latencies_s), encoding="utf-8"
    )
    (out / "translation_table.txt").write_text(format_stats_table([stats]), encoding="utf-8")
    mism = [
        {
            "id": case.entry.entry_id,
            "instruction": case.entry.instruction,
            "truth": case.entry.truth_dsl,
            "predicted": case.predicted_dsl,
            "error_kind": case.error_kind,
        }
        for case in cases
        if not case.correct
    ]
    (out / "translation_mismatches.json").write_text(
        json.dumps(mism, indent=2) + "\n", encoding="utf-8"
    )


# ------------------------------------------------------------ scenario eval

@dataclass
class ScenarioReport:
    runs: int
    successful_runs: int
    execution_ms: dict[str, float]
    feedback_s: dict[str, float]
    failures: list[dict[str, object]]
    execution_latencies_ms: list[float]
    feedback_latencies_s: list[float]
    categories_succeeded_every_run: bool

    @property
    def tsr_pct(self) -> float:
        return 100.0 * self.successful_runs / self.runs

    def as_dict(self) -> dict[str, object]:
        return {
            "runs": self.runs,
            "successful_runs": self.successful_runs,
            "tsr_fraction": f"{self.successful_runs}/{self.runs}",
            "tsr_pct": self.tsr_pct,
            "execution_latency_ms": self.execution_ms,
            "feedback_latency_s": self.feedback_s,
            "categories_succeeded_every_run": self.categories_succeeded_every_run,
            "failures": self.failures,
        }


def _run_categories_succeeded(result: ScenarioResult) -> bool:
    succeeded = {
        record.command.category.value
        for record in result.records
        if record.command is not None and record.succeeded
    }
    required = {"INFO", "MISSION", "CONFIG", "COOP", "INTERVENTION"}
    return required <= succeeded


def run_scenario_eval(
    runs: int,
    schedule: tuple[ScheduleEntry, ...],
    pipeline_factory: Callable[[], Pipeline],
) -> ScenarioReport:
    """Execute the schedule `runs` times, each on a fresh simulation."""
    if runs < 1:
        raise EvalError("runs must be >= 1")
    successful = 0
    exec_ms: list[float] = []
    fb_s: list[float] = []
    failures: list[dict[str, object]] = []
    categories_ok = True
    for run_idx in range(runs):
        pipeline = pipeline_factory()
        try:
            result = pipeline.run_scripted_schedule(schedule, session=f"run-{run_idx:03d}")
        finally:
            pipeline.host.close()
        if result.all_succeeded:
            successful += 1
        categories_ok = categories_ok and _run_categories_succeeded(result)
        for record in result.records:
            if record.succeeded:
                continue
            if record.translation_error is not None:
                stage, reason = "translation", record.translation_error[0]
            elif record.execution is not None and record.execution.status.value != "SUCCESS":
                stage, reason = "execution", record.execution.failure_reason or "rejected"
            else:
                stage, reason = "feedback", (record.feedback_error or ("unknown",))[0]
            failures.append(
                {
                    "run": run_idx,
                    "record": record.record_id,
                    "instruction": record.instruction.text,
                    "stage": stage,
                    "reason": reason,
                }
            )
        for record in result.records:
            if record.execution is not None:
                exec_ms.append(record.latency.execution_ms)
            fb_s.append(record.latency.feedback_s)
    return ScenarioReport(
        runs=runs,
        successful_runs=successful,
        execution_ms=latency_stats(exec_ms),
        feedback_s=latency_stats(fb_s),
        failures=failures,
        execution_latencies_ms=exec_ms,
        feedback_latencies_s=fb_s,
        categories_succeeded_every_run=categories_ok,
    )


def write_scenario_outputs(out_dir: str | Path, report: ScenarioReport) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario_report.json").write_text(
        json.dumps(report.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    (out / "scenario_execution_ms.txt").write_text(
        "".join(f"{v:.9f}\n" for v in report.execution_latencies_ms), encoding="utf-8"
    )
    (out / "scenario_feedback_s.txt").write_text(
        "".join(f"{v:.9f}\n" for v in report.feedback_latencies_s), encoding="utf-8"
    )
    (out / "scenario_execution_boxplot.json").write_text(
        json.dumps(boxplot_summary(report.execution_latencies_ms), indent=2) + "\n",
        encoding="utf-8",
    )
