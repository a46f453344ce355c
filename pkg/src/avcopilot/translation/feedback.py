"""Template-based feedback generation (stage 2, offline backend).

Feedback is generated only after the definitive execution outcome is known,
so the message always reflects what actually happened, including the reason
for a rejection or failure.

Templates file format, one record per line::

    template <KEY> <STATUS> :: <text>

KEY is an action id, ``<ACTION>.<param>`` to specialize on the command's
first parameter name, or ``*`` as fallback.  STATUS is SUCCESS, REJECTED,
FAILED, OUT_OF_SCOPE or TRANSLATION_ERROR.  The text may use placeholders:
``{value}``/``{name}`` (first parameter, human-rendered), ``{detail}``
(validation detail or failure reason), ``{payload[...]}`` fields,
``{instruction}``, ``{action}`` and ``{category}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..dsl import ExtractedCommand
from ..interface_node import ExecutionReport


class TemplatesError(ValueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class FeedbackMessage:
    text: str
    command_echo: str | None = None
    status_echo: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "command_echo": self.command_echo,
            "status_echo": self.status_echo,
        }


_STATUSES = ("SUCCESS", "REJECTED", "FAILED", "OUT_OF_SCOPE", "TRANSLATION_ERROR")


def human_number(value: Any) -> str:
    """Render numbers without a trailing .0 for passenger-facing text."""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    if isinstance(value, (int, float)):
        return f"{value:g}"
    return str(value)


class _Payload(dict):
    def __missing__(self, key: str) -> str:
        return "unknown"


class TemplateTable:
    def __init__(self, templates: Mapping[tuple[str, str], str]):
        self._templates = dict(templates)

    def lookup(self, key: str, first_param: str | None, status: str) -> str:
        if first_param is not None:
            hit = self._templates.get((f"{key}.{first_param}", status))
            if hit is not None:
                return hit
        hit = self._templates.get((key, status))
        if hit is not None:
            return hit
        hit = self._templates.get(("*", status))
        if hit is not None:
            return hit
        raise KeyError(f"no template for {key}/{status}")

    def render(
        self,
        status: str,
        instruction_text: str,
        cmd: ExtractedCommand | None,
        report: ExecutionReport | None,
        detail: str = "",
    ) -> str:
        action = cmd.action if cmd is not None and cmd.action else "*"
        first_name: str | None = None
        first_value: Any = ""
        if cmd is not None and cmd.parameters:
            first_name, first_value = cmd.parameters[0]
        payload = _Payload()
        if report is not None and isinstance(report.payload, dict):
            payload.update(report.payload)
        fields = {
            "instruction": instruction_text,
            "action": action,
            "category": cmd.category.value if cmd is not None else "",
            "name": first_name or "",
            "value": human_number(first_value),
            "detail": detail,
            "payload": payload,
        }
        template = self.lookup(action, first_name, status)
        return template.format_map(fields)


def load_templates(text: str) -> TemplateTable:
    templates: dict[tuple[str, str], str] = {}
    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("template "):
            raise TemplatesError(idx, f"unrecognized record: {line!r}")
        head, sep, body = line[len("template ") :].partition(" :: ")
        if not sep or not body.strip():
            raise TemplatesError(idx, f"template missing ' :: ' body: {line!r}")
        fields = head.split()
        if len(fields) != 2:
            raise TemplatesError(idx, f"template key must be '<KEY> <STATUS>': {line!r}")
        key, status = fields
        if status not in _STATUSES:
            raise TemplatesError(idx, f"unknown status {status!r}")
        if (key, status) in templates:
            raise TemplatesError(idx, f"duplicate template {key}/{status}")
        templates[(key, status)] = body.strip()
    table = TemplateTable(templates)
    for status in _STATUSES:
        try:
            table.lookup("*", None, status)
        except KeyError:
            raise TemplatesError(0, f"missing fallback template '* {status}'")
    return table


def default_templates() -> TemplateTable:
    from importlib.resources import files

    return load_templates(
        files("avcopilot.data").joinpath("templates.txt").read_text(encoding="utf-8")
    )
