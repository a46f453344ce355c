"""Translation backends behind a single pluggable boundary.

The rule backend is a pure function of the instruction text and works fully
offline; the HTTP backend posts the assembled prompt to a configurable
endpoint (any model server that answers with text) and extracts the first
DSL document from the response.  Endpoint and API key come from the
``AVCOPILOT_LLM_ENDPOINT`` / ``AVCOPILOT_LLM_API_KEY`` environment
variables or constructor arguments; the key is never logged.
"""

from __future__ import annotations

import os
from typing import Protocol, runtime_checkable

import requests

from ..dsl import ExtractedCommand, ParseError, extract_document, parse_command, serialize_command
from ..interface_node import ExecStatus, ExecutionReport
from .feedback import TemplateTable, default_templates
from .prompt import PromptBundle
from .rules import RuleTable, default_rules

ENDPOINT_ENV = "AVCOPILOT_LLM_ENDPOINT"
API_KEY_ENV = "AVCOPILOT_LLM_API_KEY"

DEFAULT_TIMEOUT_S = 10.0


class TranslationError(RuntimeError):
    """Base class for stage-1/stage-2 backend failures."""

    kind = "TranslationError"


class BackendUnavailable(TranslationError):
    """The backend could not be reached or answered with an error."""

    kind = "BackendUnavailable"


class UnparseableResponse(TranslationError):
    """The backend answered, but no valid DSL document could be extracted."""

    kind = "UnparseableResponse"


@runtime_checkable
class TranslationBackend(Protocol):
    name: str

    def translate(self, bundle: PromptBundle) -> ExtractedCommand: ...

    def feedback(
        self, instruction_text: str, cmd: ExtractedCommand | None, report: ExecutionReport
    ) -> str: ...


def _report_status(report: ExecutionReport, cmd: ExtractedCommand | None) -> str:
    from ..interface_node import RejectReason

    if (
        report.status is ExecStatus.REJECTED
        and report.validation.reason is RejectReason.OUT_OF_SCOPE_COMMAND
    ):
        return "OUT_OF_SCOPE"
    return report.status.value


class RuleBackend:
    """Deterministic offline backend: keyword rules + feedback templates."""

    name = "rule"

    def __init__(self, rules: RuleTable | None = None, templates: TemplateTable | None = None):
        self.rules = rules or default_rules()
        self.templates = templates or default_templates()

    def translate(self, bundle: PromptBundle) -> ExtractedCommand:
        return self.rules.translate_text(bundle.instruction_text)

    def feedback(
        self, instruction_text: str, cmd: ExtractedCommand | None, report: ExecutionReport
    ) -> str:
        detail = report.failure_reason or report.validation.detail
        status = _report_status(report, cmd)
        return self.templates.render(status, instruction_text, cmd, report, detail=detail)


class HttpBackend:
    """Generic JSON-over-HTTP backend for an external language model."""

    name = "http"

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout_s = timeout_s
        self._session = session or requests.Session()
        if not self.endpoint:
            raise ValueError(f"no endpoint configured (set {ENDPOINT_ENV})")

    def _post(self, prompt: str, stage: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            response = self._session.post(
                self.endpoint,
                json={"prompt": prompt, "stage": stage},
                headers=headers,
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"API server unreachable: {exc.__class__.__name__}")
        if response.status_code >= 400:
            raise BackendUnavailable(f"API server error: HTTP {response.status_code}")
        content_type = response.headers.get("content-type", "")
        if "json" in content_type:
            try:
                body = response.json()
            except ValueError:
                return response.text
            if isinstance(body, dict):
                for key in ("text", "response", "output", "completion"):
                    if isinstance(body.get(key), str):
                        return body[key]
        return response.text

    def translate(self, bundle: PromptBundle) -> ExtractedCommand:
        raw = self._post(bundle.render(), stage="translate")
        doc = extract_document(raw)
        if doc is None:
            raise UnparseableResponse("response contains no command_type line")
        try:
            return parse_command(doc)
        except ParseError as exc:
            raise UnparseableResponse(f"extracted document does not parse: {exc}")

    def feedback(
        self, instruction_text: str, cmd: ExtractedCommand | None, report: ExecutionReport
    ) -> str:
        sections = [
            "You are the voice of an autonomous vehicle. Reply to the passenger in "
            "one or two sentences, reflecting the actual outcome below.",
            f"Passenger request: {instruction_text}",
        ]
        if cmd is not None:
            sections.append("Extracted command:\n" + serialize_command(cmd).strip())
        sections.append(f"Execution status: {_report_status(report, cmd)}")
        if report.failure_reason:
            sections.append(f"Reason: {report.failure_reason}")
        elif report.validation.detail:
            sections.append(f"Reason: {report.validation.detail}")
        if report.payload:
            sections.append(f"Result data: {report.payload}")
        text = self._post("\n\n".join(sections), stage="feedback").strip()
        if not text:
            raise UnparseableResponse("empty feedback response")
        return text


def default_rule_backend() -> RuleBackend:
    return RuleBackend()
