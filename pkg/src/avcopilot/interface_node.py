"""Validation and dispatch layer between extracted commands and the sim.

Every command is checked against the action registry before anything is
dispatched: unknown actions, category mismatches, unknown or missing
parameters, and out-of-bounds values are all rejected without touching the
simulation.  Accepted commands are mapped to their registered capability,
applied at a tick boundary, and acknowledged with a definitive report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .dsl import Category, ExtractedCommand
from .registry import ActionRegistry, ActionSpec
from .simulation import SimHost


class Verdict(Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"


class RejectReason(Enum):
    UNKNOWN_ACTION = "UNKNOWN_ACTION"
    CATEGORY_MISMATCH = "CATEGORY_MISMATCH"
    UNKNOWN_PARAM = "UNKNOWN_PARAM"
    OUT_OF_BOUNDS = "OUT_OF_BOUNDS"
    MISSING_PARAM = "MISSING_PARAM"
    OUT_OF_SCOPE_COMMAND = "OUT_OF_SCOPE_COMMAND"


class ExecStatus(Enum):
    SUCCESS = "SUCCESS"
    REJECTED = "REJECTED"
    FAILED = "FAILED"


@dataclass(frozen=True)
class ValidationResult:
    verdict: Verdict
    reason: RejectReason | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.verdict is Verdict.REJECTED and self.reason is None:
            raise ValueError("rejections must carry a reason code")
        if self.verdict is Verdict.ACCEPTED and self.reason is not None:
            raise ValueError("accepted results carry no reason code")

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED

    def as_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason.value if self.reason else None,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ExecutionReport:
    status: ExecStatus
    validation: ValidationResult
    payload: dict[str, Any] | None = None
    failure_reason: str | None = None
    exec_latency_ms: float = 0.0

    def __post_init__(self) -> None:
        rejected = self.validation.verdict is Verdict.REJECTED
        if rejected != (self.status is ExecStatus.REJECTED):
            raise ValueError("status REJECTED must mirror a REJECTED validation")
        if self.exec_latency_ms < 0:
            raise ValueError("latency cannot be negative")

    def as_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "validation": self.validation.as_dict(),
            "payload": self.payload,
            "failure_reason": self.failure_reason,
            "exec_latency_ms": self.exec_latency_ms,
        }


@dataclass(frozen=True)
class LatencyRecord:
    translation_s: float
    execution_ms: float
    feedback_s: float

    def __post_init__(self) -> None:
        if min(self.translation_s, self.execution_ms, self.feedback_s) < 0:
            raise ValueError("latencies must be non-negative")

    def as_dict(self) -> dict[str, float]:
        return {
            "translation_s": self.translation_s,
            "execution_ms": self.execution_ms,
            "feedback_s": self.feedback_s,
        }


def report_from_dict(data: dict[str, Any]) -> ExecutionReport:
    """Rebuild a report from its JSON form (session-log replay)."""
    vdata = data["validation"]
    validation = ValidationResult(
        verdict=Verdict(vdata["verdict"]),
        reason=RejectReason(vdata["reason"]) if vdata.get("reason") else None,
        detail=vdata.get("detail", ""),
    )
    return ExecutionReport(
        status=ExecStatus(data["status"]),
        validation=validation,
        payload=data.get("payload"),
        failure_reason=data.get("failure_reason"),
        exec_latency_ms=data.get("exec_latency_ms", 0.0),
    )


def _accept() -> ValidationResult:
    return ValidationResult(Verdict.ACCEPTED)


def _reject(reason: RejectReason, detail: str) -> ValidationResult:
    return ValidationResult(Verdict.REJECTED, reason, detail)


def _check_param_value(spec: ActionSpec, name: str, value: Any) -> ValidationResult | None:
    param = spec.param(name)
    assert param is not None
    if param.kind == "number":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return _reject(
                RejectReason.OUT_OF_BOUNDS,
                f"{name} expects a number, got {value!r}",
            )
        if not param.min_value <= float(value) <= param.max_value:  # type: ignore[operator]
            unit = f" {param.unit}" if param.unit and param.unit != "-" else ""
            return _reject(
                RejectReason.OUT_OF_BOUNDS,
                f"{name}={value:g} outside [{param.min_value:g}, {param.max_value:g}]{unit}",
            )
    elif param.kind == "enum":
        if not isinstance(value, str) or value not in param.allowed:
            allowed = "|".join(param.allowed)
            return _reject(
                RejectReason.OUT_OF_BOUNDS,
                f"{name}={value!r} not one of {allowed}",
            )
    else:  # string
        if not isinstance(value, str):
            return _reject(
                RejectReason.OUT_OF_BOUNDS, f"{name} expects a string, got {value!r}"
            )
    return None


def validate(cmd: ExtractedCommand, registry: ActionRegistry) -> ValidationResult:
    """Check a structurally valid command against the registry allowlist."""
    if cmd.category is Category.OUT_OF_SCOPE:
        return _reject(
            RejectReason.OUT_OF_SCOPE_COMMAND, "request is outside the system's scope"
        )
    assert cmd.action is not None
    spec = registry.get(cmd.action)
    if spec is None:
        return _reject(RejectReason.UNKNOWN_ACTION, f"action {cmd.action} is not registered")
    if spec.category is not cmd.category:
        return _reject(
            RejectReason.CATEGORY_MISMATCH,
            f"{cmd.action} belongs to {spec.category.value}, not {cmd.category.value}",
        )
    given = {name for name, _ in cmd.parameters}
    known = {p.name for p in spec.params}
    for name in given:
        if name not in known:
            return _reject(RejectReason.UNKNOWN_PARAM, f"{cmd.action} takes no parameter {name!r}")
    for param in spec.params:
        if param.required and param.name not in given:
            return _reject(
                RejectReason.MISSING_PARAM, f"{cmd.action} requires parameter {param.name!r}"
            )
    if spec.params and not given:
        names = ", ".join(p.name for p in spec.params)
        return _reject(
            RejectReason.MISSING_PARAM, f"{cmd.action} requires one of: {names}"
        )
    for name, value in cmd.parameters:
        problem = _check_param_value(spec, name, value)
        if problem is not None:
            return problem
    return _accept()


class InterfaceNode:
    """Validates commands and dispatches their mapped capability to the sim."""

    def __init__(self, registry: ActionRegistry, host: SimHost):
        self.registry = registry
        self.host = host
        self.verify_mapping()

    def verify_mapping(self) -> None:
        """Startup closure check: every registered capability must exist."""
        from .simulation import CAPABILITIES

        unknown = self.registry.capabilities() - CAPABILITIES
        if unknown:
            raise RuntimeError(f"registry names unmapped capabilities: {sorted(unknown)}")

    def execute(self, cmd: ExtractedCommand) -> ExecutionReport:
        """Validate, then apply the mapped capability at a tick boundary.

        Rejected commands never touch the simulation.  The returned latency
        is wall-clock time from dispatch to the sim's acknowledgment.
        """
        validation = validate(cmd, self.registry)
        if not validation.accepted:
            return ExecutionReport(
                status=ExecStatus.REJECTED,
                validation=validation,
                failure_reason=validation.detail,
            )
        spec = self.registry.get(cmd.action)  # type: ignore[arg-type]
        assert spec is not None
        args = {name: value for name, value in cmd.parameters}
        started = time.perf_counter()
        result = self.host.submit(spec.capability, args)
        latency_ms = (time.perf_counter() - started) * 1e3
        if result.ok:
            return ExecutionReport(
                status=ExecStatus.SUCCESS,
                validation=validation,
                payload=result.payload,
                exec_latency_ms=latency_ms,
            )
        reason = result.reason or "execution failed"
        if result.failure_kind:
            reason = f"{result.failure_kind}: {reason}"
        return ExecutionReport(
            status=ExecStatus.FAILED,
            validation=validation,
            failure_reason=reason,
            exec_latency_ms=latency_ms,
        )
