"""Command DSL: types, parser, canonical serializer.

The co-pilot exchanges commands as small structured-text documents,
organised by interaction category rather than by vehicle-software module::

    command_type: CONFIG
    action: SET_PARAM
    parameters:
      - name: max_vel
        value: 90.0

Grammar (bit-exact):

* line 1: ``command_type: <TOKEN>`` with TOKEN one of the six category
  tokens;
* optional line 2: ``action: <TOKEN>`` (uppercase/underscore identifier),
  required for every category except OUT_OF_SCOPE;
* optional block ``parameters:`` followed by one or more items
  ``  - name: <ident>`` / ``    value: <scalar>``;
* LF line endings, exactly one space after each colon, no blank lines.

Scalars are finite decimal numbers or strings (bare identifiers, or
double-quoted with ``\\"`` and ``\\\\`` escapes).  No nested structures.

``serialize_command`` emits the canonical form used for logging and
exact-match scoring: fixed key order, 2-space indentation, numbers in
their minimal decimal representation with one fractional digit kept for
integral values (``90`` renders as ``90.0``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

Scalar = Union[float, str]


class Category(Enum):
    """The six interaction categories a command can belong to."""

    INFO = "INFO"
    MISSION = "MISSION"
    CONFIG = "CONFIG"
    COOP = "COOP"
    INTERVENTION = "INTERVENTION"
    OUT_OF_SCOPE = "OUT_OF_SCOPE"


CATEGORY_TOKENS = frozenset(c.value for c in Category)

_ACTION_RE = re.compile(r"[A-Z][A-Z0-9_]*")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_NON_FINITE_RE = re.compile(r"[+-]?(?:nan|inf|infinity)", re.IGNORECASE)

_LINE_COMMAND = re.compile(r"command_type: (\S+)")
_LINE_ACTION = re.compile(r"action: (\S+)")
_LINE_NAME = re.compile(r"  - name: (\S+)")
_LINE_VALUE = re.compile(r"    value: (\S.*)")
_LINE_KEYISH = re.compile(r"\s*-?\s*([A-Za-z_][A-Za-z0-9_]*):")


class ParseError(ValueError):
    """Raised when a DSL document cannot be parsed.

    Carries the 1-based line number, a reason string and a stable code:
    UNKNOWN_CATEGORY_TOKEN, UNKNOWN_KEY, MALFORMED_PARAMETER_ITEM,
    DUPLICATE_KEY, NON_FINITE_NUMBER or MALFORMED_DOCUMENT.
    """

    def __init__(self, line: int, code: str, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.code = code
        self.reason = reason


@dataclass(frozen=True)
class ExtractedCommand:
    """A validated-for-structure command: category, action, parameters.

    ``parameters`` is an ordered tuple of (name, value) pairs; values are
    floats or strings.  OUT_OF_SCOPE commands carry neither action nor
    parameters.
    """

    category: Category
    action: str | None = None
    parameters: tuple[tuple[str, Scalar], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.category is Category.OUT_OF_SCOPE:
            if self.action is not None or self.parameters:
                raise ValueError("OUT_OF_SCOPE commands carry no action and no parameters")
        else:
            if self.action is None or not _ACTION_RE.fullmatch(self.action):
                raise ValueError(f"invalid action identifier: {self.action!r}")
        seen: set[str] = set()
        for name, value in self.parameters:
            if not _IDENT_RE.fullmatch(name):
                raise ValueError(f"invalid parameter name: {name!r}")
            if name in seen:
                raise ValueError(f"duplicate parameter name: {name!r}")
            seen.add(name)
            if isinstance(value, bool) or not isinstance(value, (float, int, str)):
                raise ValueError(f"parameter {name!r} has unsupported value type")
            if isinstance(value, (float, int)) and not math.isfinite(float(value)):
                raise ValueError(f"parameter {name!r} is not finite")

    def param(self, name: str) -> Scalar | None:
        for key, value in self.parameters:
            if key == name:
                return value
        return None


def _parse_scalar(raw: str, line_no: int) -> Scalar:
    if raw.startswith('"'):
        return _parse_quoted(raw, line_no)
    if _NON_FINITE_RE.fullmatch(raw):
        raise ParseError(line_no, "NON_FINITE_NUMBER", f"non-finite number {raw!r}")
    if _NUMBER_RE.fullmatch(raw):
        value = float(raw)
        if not math.isfinite(value):
            raise ParseError(line_no, "NON_FINITE_NUMBER", f"number {raw!r} overflows")
        return value
    if _IDENT_RE.fullmatch(raw):
        return raw
    raise ParseError(
        line_no, "MALFORMED_PARAMETER_ITEM", f"malformed scalar {raw!r}"
    )


def _parse_quoted(raw: str, line_no: int) -> str:
    out: list[str] = []
    i = 1
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            if i + 1 >= len(raw) or raw[i + 1] not in ('"', "\\"):
                raise ParseError(line_no, "MALFORMED_PARAMETER_ITEM", "bad escape in string")
            out.append(raw[i + 1])
            i += 2
            continue
        if ch == '"':
            if i != len(raw) - 1:
                raise ParseError(
                    line_no, "MALFORMED_PARAMETER_ITEM", "trailing content after string"
                )
            return "".join(out)
        out.append(ch)
        i += 1
    raise ParseError(line_no, "MALFORMED_PARAMETER_ITEM", "unterminated string")


def parse_command(text: str) -> ExtractedCommand:
    """Parse a DSL document into an :class:`ExtractedCommand`.

    Raises :class:`ParseError` (never anything else) on any input that is
    not a structurally valid document.
    """
    if not isinstance(text, str):
        raise ParseError(1, "MALFORMED_DOCUMENT", "input is not text")
    lines = text.split("\n")
    # A canonical document ends with a trailing LF, producing one empty
    # final element; a missing trailing LF is also accepted.
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "MALFORMED_DOCUMENT", "empty document")

    category: Category | None = None
    action: str | None = None
    params: list[tuple[str, Scalar]] = []
    seen_params_block = False
    pending_name: str | None = None
    param_names: set[str] = set()

    for idx, line in enumerate(lines, start=1):
        if idx == 1:
            m = _LINE_COMMAND.fullmatch(line)
            if not m:
                if line.startswith("command_type:"):
                    raise ParseError(idx, "MALFORMED_DOCUMENT", "malformed command_type line")
                keyish = _LINE_KEYISH.match(line)
                if keyish and keyish.group(1) != "command_type":
                    raise ParseError(
                        idx, "UNKNOWN_KEY", f"expected command_type, got {keyish.group(1)!r}"
                    )
                raise ParseError(idx, "MALFORMED_DOCUMENT", "first line must be command_type")
            token = m.group(1)
            if token not in CATEGORY_TOKENS:
                raise ParseError(idx, "UNKNOWN_CATEGORY_TOKEN", f"unknown category {token!r}")
            category = Category(token)
            continue

        if pending_name is not None:
            m = _LINE_VALUE.fullmatch(line)
            if not m:
                raise ParseError(
                    idx, "MALFORMED_PARAMETER_ITEM", "parameter item is missing its value line"
                )
            value = _parse_scalar(m.group(1), idx)
            params.append((pending_name, value))
            pending_name = None
            continue

        if seen_params_block:
            m = _LINE_NAME.fullmatch(line)
            if not m:
                if line.strip().startswith("- name:") or line.strip().startswith("value:"):
                    raise ParseError(
                        idx, "MALFORMED_PARAMETER_ITEM", "bad indentation in parameter item"
                    )
                raise ParseError(
                    idx, "MALFORMED_PARAMETER_ITEM", "expected a '  - name:' item line"
                )
            name = m.group(1)
            if not _IDENT_RE.fullmatch(name):
                raise ParseError(idx, "MALFORMED_PARAMETER_ITEM", f"bad parameter name {name!r}")
            if name in param_names:
                raise ParseError(idx, "DUPLICATE_KEY", f"duplicate parameter {name!r}")
            param_names.add(name)
            pending_name = name
            continue

        if line == "parameters:":
            seen_params_block = True
            continue

        m = _LINE_ACTION.fullmatch(line)
        if m:
            if action is not None:
                raise ParseError(idx, "DUPLICATE_KEY", "duplicate action key")
            token = m.group(1)
            if not _ACTION_RE.fullmatch(token):
                raise ParseError(idx, "MALFORMED_DOCUMENT", f"malformed action token {token!r}")
            action = token
            continue

        if line.startswith("command_type:"):
            raise ParseError(idx, "DUPLICATE_KEY", "duplicate command_type key")
        if line.startswith("action:"):
            raise ParseError(idx, "MALFORMED_DOCUMENT", "malformed action line")
        keyish = _LINE_KEYISH.match(line)
        if keyish and keyish.group(1) not in ("action", "parameters", "name", "value"):
            raise ParseError(idx, "UNKNOWN_KEY", f"unknown key {keyish.group(1)!r}")
        raise ParseError(idx, "MALFORMED_DOCUMENT", f"unexpected line {line!r}")

    if pending_name is not None:
        raise ParseError(len(lines), "MALFORMED_PARAMETER_ITEM", "parameter item missing value")
    if seen_params_block and not params:
        raise ParseError(
            len(lines), "MALFORMED_DOCUMENT", "parameters block requires at least one item"
        )

    assert category is not None
    if category is Category.OUT_OF_SCOPE:
        if action is not None or params:
            raise ParseError(
                len(lines), "MALFORMED_DOCUMENT", "OUT_OF_SCOPE takes no action or parameters"
            )
        return ExtractedCommand(category=category)
    if action is None:
        raise ParseError(len(lines), "MALFORMED_DOCUMENT", f"{category.value} requires an action")
    return ExtractedCommand(category=category, action=action, parameters=tuple(params))


def render_scalar(value: Scalar) -> str:
    """Render a scalar in its canonical document form."""
    if isinstance(value, bool):
        raise ValueError("booleans are not DSL scalars")
    if isinstance(value, (int, float)):
        number = float(value)
        if not math.isfinite(number):
            raise ValueError("non-finite numbers cannot be serialized")
        return repr(number)
    if (
        _IDENT_RE.fullmatch(value)
        and not _NON_FINITE_RE.fullmatch(value)
        and not _NUMBER_RE.fullmatch(value)
    ):
        return value
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_command(cmd: ExtractedCommand) -> str:
    """Serialize a command to its canonical document (always ends with LF)."""
    lines = [f"command_type: {cmd.category.value}"]
    if cmd.action is not None:
        lines.append(f"action: {cmd.action}")
    if cmd.parameters:
        lines.append("parameters:")
        for name, value in cmd.parameters:
            lines.append(f"  - name: {name}")
            lines.append(f"    value: {render_scalar(value)}")
    return "\n".join(lines) + "\n"


_DOC_LINE_SHAPES = (_LINE_ACTION, _LINE_NAME, _LINE_VALUE)


def extract_document(text: str) -> str | None:
    """Pull the first DSL document out of free-form text.

    Scans for the first line starting with ``command_type:`` and keeps
    consuming lines while they still look like document lines.  Returns the
    extracted text (not yet parsed) or None when no document is present.
    """
    lines = text.split("\n")
    start = None
    for i, line in enumerate(lines):
        if line.strip().startswith("command_type:"):
            start = i
            break
    if start is None:
        return None
    indent = len(lines[start]) - len(lines[start].lstrip())
    doc = [lines[start][indent:]]
    for line in lines[start + 1 :]:
        candidate = line[indent:] if line[:indent].strip() == "" else line
        if candidate == "parameters:" or any(
            shape.fullmatch(candidate) for shape in _DOC_LINE_SHAPES
        ):
            doc.append(candidate)
            continue
        break
    return "\n".join(doc) + "\n"


def out_of_scope() -> ExtractedCommand:
    """The canonical command for requests the system does not handle."""
    return ExtractedCommand(category=Category.OUT_OF_SCOPE)


def command(category: str | Category, action: str | None = None,
            parameters: Iterable[tuple[str, Scalar]] = ()) -> ExtractedCommand:
    """Convenience constructor accepting a category token or enum member."""
    cat = category if isinstance(category, Category) else Category(category)
    return ExtractedCommand(category=cat, action=action, parameters=tuple(parameters))
