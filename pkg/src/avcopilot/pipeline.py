"""Two-stage interaction pipeline: translate, validate/execute, feedback.

Each instruction flows through the stages strictly in order and produces
exactly one :class:`InteractionRecord`, persisted to an append-only
JSON-lines session log before the caller sees the result.  A translation
failure skips execution (the sim is never touched) and still yields a
record with failure feedback.

Scripted schedules drive the same pipeline against a caller-stepped sim:
``at <seconds> <instruction text>`` lines, strictly increasing times.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .dsl import ExtractedCommand, parse_command, serialize_command
from .interface_node import (
    ExecStatus,
    ExecutionReport,
    InterfaceNode,
    LatencyRecord,
    report_from_dict,
)
from .registry import ActionRegistry
from .simulation import AvStatus, SimHost, VehicleState
from .translation import (
    AblationMode,
    IclExample,
    Instruction,
    PromptBundle,
    TranslationBackend,
    TranslationError,
    assemble_prompt,
    default_icl_examples,
    default_knowledge_base,
    default_templates,
)


@dataclass(frozen=True)
class InteractionRecord:
    """Everything known about one instruction's trip through the pipeline."""

    record_id: str
    instruction: Instruction
    command: ExtractedCommand | None
    translation_error: tuple[str, str] | None  # (kind, detail)
    execution: ExecutionReport | None
    feedback_text: str
    feedback_error: tuple[str, str] | None
    latency: LatencyRecord
    translated_at: float
    executed_at: float | None
    feedback_at: float

    @property
    def succeeded(self) -> bool:
        return (
            self.translation_error is None
            and self.feedback_error is None
            and self.execution is not None
            and self.execution.status is ExecStatus.SUCCESS
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "id": self.record_id,
            "session": self.instruction.session,
            "instruction": {
                "text": self.instruction.text,
                "session": self.instruction.session,
                "timestamp": self.instruction.timestamp,
            },
            "command": serialize_command(self.command) if self.command else None,
            "translation_error": (
                {"kind": self.translation_error[0], "detail": self.translation_error[1]}
                if self.translation_error
                else None
            ),
            "execution": self.execution.as_dict() if self.execution else None,
            "feedback": self.feedback_text,
            "feedback_error": (
                {"kind": self.feedback_error[0], "detail": self.feedback_error[1]}
                if self.feedback_error
                else None
            ),
            "latency": self.latency.as_dict(),
            "timestamps": {
                "translated": self.translated_at,
                "executed": self.executed_at,
                "feedback": self.feedback_at,
            },
        }


def record_from_dict(data: dict[str, Any]) -> InteractionRecord:
    instruction = Instruction(
        text=data["instruction"]["text"],
        session=data["instruction"]["session"],
        timestamp=data["instruction"]["timestamp"],
    )
    command = parse_command(data["command"]) if data.get("command") else None
    translation_error = None
    if data.get("translation_error"):
        translation_error = (
            data["translation_error"]["kind"],
            data["translation_error"]["detail"],
        )
    feedback_error = None
    if data.get("feedback_error"):
        feedback_error = (data["feedback_error"]["kind"], data["feedback_error"]["detail"])
    execution = report_from_dict(data["execution"]) if data.get("execution") else None
    latency = LatencyRecord(**data["latency"])
    stamps = data["timestamps"]
    return InteractionRecord(
        record_id=data["id"],
        instruction=instruction,
        command=command,
        translation_error=translation_error,
        execution=execution,
        feedback_text=data["feedback"],
        feedback_error=feedback_error,
        latency=latency,
        translated_at=stamps["translated"],
        executed_at=stamps["executed"],
        feedback_at=stamps["feedback"],
    )


class SessionLog:
    """Append-only JSON-lines log, one file per session.

    Appends are single ``write`` calls of one full line, so a crash can only
    truncate the final line; ``load`` detects and skips such a tail.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def path_for(self, session: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in session)
        return self.directory / f"session-{safe}.jsonl"

    def append(self, record: InteractionRecord) -> None:
        line = json.dumps(record.as_dict(), separators=(",", ":")) + "\n"
        with self._lock:
            with open(self.path_for(record.instruction.session), "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()

    def load(self, session: str) -> list[InteractionRecord]:
        path = self.path_for(session)
        if not path.exists():
            return []
        records: list[InteractionRecord] = []
        raw = path.read_text(encoding="utf-8")
        lines = raw.split("\n")
        complete, tail = lines[:-1], lines[-1]
        for line in complete:
            if not line:
                continue
            records.append(record_from_dict(json.loads(line)))
        if tail:
            # No trailing newline: the final append was interrupted.
            try:
                records.append(record_from_dict(json.loads(tail)))
            except (json.JSONDecodeError, KeyError):
                pass
        return records


@dataclass(frozen=True)
class ScheduleEntry:
    at_s: float
    text: str


def load_schedule(text: str) -> tuple[ScheduleEntry, ...]:
    entries: list[ScheduleEntry] = []
    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(None, 2)
        if len(fields) != 3 or fields[0] != "at":
            raise ValueError(f"line {idx}: expected 'at <seconds> <instruction>'")
        entries.append(ScheduleEntry(at_s=float(fields[1]), text=fields[2]))
    for a, b in zip(entries, entries[1:]):
        if b.at_s <= a.at_s:
            raise ValueError("schedule times must be strictly increasing")
    return tuple(entries)


def default_schedule() -> tuple[ScheduleEntry, ...]:
    from importlib.resources import files

    return load_schedule(
        files("avcopilot.data").joinpath("schedule.txt").read_text(encoding="utf-8")
    )


@dataclass
class ScenarioResult:
    records: list[InteractionRecord]
    trajectory: list[tuple[float, str, float, float, str]]  # (t, edge, s, v, mode)

    @property
    def all_succeeded(self) -> bool:
        return all(record.succeeded for record in self.records)

    def trajectory_digest(self) -> str:
        import hashlib

        blob = repr(self.trajectory).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


class Pipeline:
    """Per-session serialized orchestration of the two-stage loop."""

    def __init__(
        self,
        registry: ActionRegistry,
        host: SimHost,
        backend: TranslationBackend,
        kb: str | None = None,
        icl: tuple[IclExample, ...] | None = None,
        ablation: AblationMode = AblationMode.BASELINE,
        log_dir: str | Path | None = None,
    ):
        self.registry = registry
        self.host = host
        self.backend = backend
        self.interface = InterfaceNode(registry, host)
        self.kb = kb if kb is not None else default_knowledge_base()
        self.icl = icl if icl is not None else default_icl_examples()
        self.ablation = ablation
        self.log = SessionLog(log_dir) if log_dir is not None else None
        self._templates = default_templates()
        self._counter = itertools.count(1)
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _session_lock(self, session: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session, threading.Lock())

    def bundle_for(self, instruction: Instruction) -> PromptBundle:
        status: AvStatus | None = None
        if self.ablation.includes_status:
            status = self.host.snapshot()
        return assemble_prompt(self.kb, status, self.icl, instruction, self.ablation)

    def handle_instruction(self, text: str, session: str = "default") -> InteractionRecord:
        """Run one instruction through all stages and persist the record."""
        instruction = Instruction(text=text, session=session)
        with self._session_lock(session):
            record = self._run_stages(instruction)
        if self.log is not None:
            self.log.append(record)
        return record

    def _run_stages(self, instruction: Instruction) -> InteractionRecord:
        record_id = f"r{next(self._counter):06d}"
        bundle = self.bundle_for(instruction)

        t0 = time.perf_counter()
        command: ExtractedCommand | None = None
        translation_error: tuple[str, str] | None = None
        try:
            command = self.backend.translate(bundle)
        except TranslationError as exc:
            translation_error = (exc.kind, str(exc))
        translated_at = time.perf_counter()
        translation_s = translated_at - t0

        execution: ExecutionReport | None = None
        executed_at: float | None = None
        execution_ms = 0.0
        if translation_error is None:
            assert command is not None
            execution = self.interface.execute(command)
            executed_at = time.perf_counter()
            execution_ms = execution.exec_latency_ms

        fb_start = time.perf_counter()
        feedback_error: tuple[str, str] | None = None
        if translation_error is not None:
            feedback_text = self._templates.render(
                "TRANSLATION_ERROR", instruction.text, None, None, detail=translation_error[1]
            )
        else:
            assert command is not None and execution is not None
            try:
                feedback_text = self.backend.feedback(instruction.text, command, execution)
            except TranslationError as exc:
                feedback_error = (exc.kind, str(exc))
                feedback_text = self._templates.render(
                    "TRANSLATION_ERROR", instruction.text, command, execution, detail=str(exc)
                )
        feedback_at = time.perf_counter()
        feedback_s = feedback_at - fb_start

        return InteractionRecord(
            record_id=record_id,
            instruction=instruction,
            command=command,
            translation_error=translation_error,
            execution=execution,
            feedback_text=feedback_text,
            feedback_error=feedback_error,
            latency=LatencyRecord(
                translation_s=translation_s,
                execution_ms=execution_ms,
                feedback_s=feedback_s,
            ),
            translated_at=translated_at,
            executed_at=executed_at,
            feedback_at=feedback_at,
        )

    # ------------------------------------------------------------- scripted

    def run_scripted_schedule(
        self,
        schedule: tuple[ScheduleEntry, ...] | list[ScheduleEntry],
        session: str = "scenario",
        tail_s: float = 30.0,
        record_trajectory: bool = True,
    ) -> ScenarioResult:
        """Submit each instruction when sim time reaches its trigger.

        After the last instruction the sim keeps running until the vehicle
        halts (or `tail_s` of extra sim time passes) so stop transients are
        part of the returned trajectory.
        """
        trajectory: list[tuple[float, str, float, float, str]] = []

        def hook(state: VehicleState) -> None:
            trajectory.append((state.t, state.edge, state.s, state.v, state.mode.value))

        tick_hook = hook if record_trajectory else None
        records: list[InteractionRecord] = []
        for entry in schedule:
            self.host.advance_to(entry.at_s, tick_hook)
            records.append(self.handle_instruction(entry.text, session=session))
        deadline = self.host.kernel.t + tail_s
        while self.host.kernel.t < deadline:
            self.host.advance(self.host.dt, tick_hook)
            state = self.host.kernel.vehicle_state()
            if state.v == 0.0 and state.mode.value != "DRIVING":
                break
        return ScenarioResult(records=records, trajectory=trajectory)

    # ------------------------------------------------------------ telemetry

    def sample_telemetry(
        self, duration_s: float, cadence_hz: float = 10.0
    ) -> list[AvStatus]:
        """Advance the scripted sim, sampling snapshots at a fixed cadence."""
        period = 1.0 / cadence_hz
        frames: list[AvStatus] = []
        t_end = self.host.kernel.t + duration_s
        next_frame = self.host.kernel.t
        while self.host.kernel.t < t_end - 1e-12:
            if self.host.kernel.t >= next_frame - 1e-12:
                frames.append(self.host.snapshot())
                next_frame += period
            self.host.advance(self.host.dt)
        return frames
