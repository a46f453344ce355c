"""Action registry: the explicit allowlist mapping commands to executions.

Every action the vehicle may perform is enumerated here with its category,
parameter bounds and the simulation capability it maps to.  Nothing outside
this registry is ever dispatched; the mapping is deliberately manual.

Registry document format (line-oriented, ``#`` comments allowed)::

    action <ID> category <TOKEN> capability <ident>
      param <name> number <unit> <min> <max>
      param <name> enum <v1|v2|...>
      param <name> string

Validation policy derived from the param kinds: enum and string params are
required; numeric params are optional, but an action that declares any
params must receive at least one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .dsl import Category, CATEGORY_TOKENS


class RegistryError(ValueError):
    """Raised when a registry document is invalid.

    Codes: DUPLICATE_ACTION, EMPTY_CATEGORY, INVALID_BOUNDS,
    UNKNOWN_CAPABILITY, MALFORMED_LINE.
    """

    def __init__(self, line: int, code: str, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.code = code
        self.reason = reason


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "number" | "string" | "enum"
    unit: str | None = None
    min_value: float | None = None
    max_value: float | None = None
    allowed: tuple[str, ...] = ()

    @property
    def required(self) -> bool:
        return self.kind in ("enum", "string")


@dataclass(frozen=True)
class ActionSpec:
    action: str
    category: Category
    capability: str
    params: tuple[ParamSpec, ...] = field(default_factory=tuple)

    def param(self, name: str) -> ParamSpec | None:
        for spec in self.params:
            if spec.name == name:
                return spec
        return None


class ActionRegistry:
    """Immutable set of :class:`ActionSpec`, keyed by action id."""

    def __init__(self, specs: list[ActionSpec]):
        self._by_action: dict[str, ActionSpec] = {}
        for spec in specs:
            if spec.action in self._by_action:
                raise RegistryError(0, "DUPLICATE_ACTION", f"duplicate action {spec.action}")
            self._by_action[spec.action] = spec

    def get(self, action: str) -> ActionSpec | None:
        return self._by_action.get(action)

    def actions(self) -> tuple[str, ...]:
        return tuple(self._by_action)

    def capabilities(self) -> frozenset[str]:
        return frozenset(spec.capability for spec in self._by_action.values())

    def by_category(self, category: Category) -> tuple[ActionSpec, ...]:
        return tuple(s for s in self._by_action.values() if s.category is category)

    def __len__(self) -> int:
        return len(self._by_action)

    def __iter__(self) -> Iterator[ActionSpec]:
        return iter(self._by_action.values())


def _known_capabilities() -> frozenset[str]:
    from .simulation.kernel import CAPABILITIES

    return CAPABILITIES


def load_registry(text: str, known_capabilities: frozenset[str] | None = None) -> ActionRegistry:
    """Parse a registry document and enforce every registry invariant."""
    if known_capabilities is None:
        known_capabilities = _known_capabilities()

    specs: list[ActionSpec] = []
    current: dict | None = None
    current_params: list[ParamSpec] = []
    seen_actions: set[str] = set()

    def close_current() -> None:
        nonlocal current, current_params
        if current is not None:
            specs.append(ActionSpec(params=tuple(current_params), **current))
        current = None
        current_params = []

    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "action":
            close_current()
            if len(fields) != 6 or fields[2] != "category" or fields[4] != "capability":
                raise RegistryError(idx, "MALFORMED_LINE", f"malformed action record: {line!r}")
            action_id, token, capability = fields[1], fields[3], fields[5]
            if action_id in seen_actions:
                raise RegistryError(idx, "DUPLICATE_ACTION", f"duplicate action {action_id}")
            seen_actions.add(action_id)
            if token not in CATEGORY_TOKENS or token == Category.OUT_OF_SCOPE.value:
                raise RegistryError(idx, "MALFORMED_LINE", f"bad category token {token!r}")
            if capability not in known_capabilities:
                raise RegistryError(
                    idx, "UNKNOWN_CAPABILITY", f"capability {capability!r} is not provided"
                )
            current = {
                "action": action_id,
                "category": Category(token),
                "capability": capability,
            }
        elif fields[0] == "param":
            if current is None:
                raise RegistryError(idx, "MALFORMED_LINE", "param line outside an action record")
            if any(p.name == fields[1] for p in current_params):
                raise RegistryError(idx, "MALFORMED_LINE", f"duplicate param {fields[1]!r}")
            if len(fields) == 6 and fields[2] == "number":
                name, _, unit, lo, hi = fields[1:]
                try:
                    lo_v, hi_v = float(lo), float(hi)
                except ValueError:
                    raise RegistryError(idx, "INVALID_BOUNDS", f"non-numeric bounds: {line!r}")
                if not (math.isfinite(lo_v) and math.isfinite(hi_v)) or lo_v > hi_v:
                    raise RegistryError(idx, "INVALID_BOUNDS", f"min > max for param {name!r}")
                current_params.append(
                    ParamSpec(name=name, kind="number", unit=unit, min_value=lo_v, max_value=hi_v)
                )
            elif len(fields) == 4 and fields[2] == "enum":
                values = tuple(v for v in fields[3].split("|") if v)
                if not values:
                    raise RegistryError(idx, "MALFORMED_LINE", "enum param needs >=1 value")
                current_params.append(ParamSpec(name=fields[1], kind="enum", allowed=values))
            elif len(fields) == 3 and fields[2] == "string":
                current_params.append(ParamSpec(name=fields[1], kind="string"))
            else:
                raise RegistryError(idx, "MALFORMED_LINE", f"malformed param line: {line!r}")
        else:
            raise RegistryError(idx, "MALFORMED_LINE", f"unrecognized record: {line!r}")

    close_current()

    registry = ActionRegistry(specs)
    for cat in Category:
        if cat is Category.OUT_OF_SCOPE:
            continue
        if not registry.by_category(cat):
            raise RegistryError(0, "EMPTY_CATEGORY", f"category {cat.value} has no actions")
    return registry


def default_registry_text() -> str:
    from importlib.resources import files

    return files("avcopilot.data").joinpath("registry.txt").read_text(encoding="utf-8")


def default_registry() -> ActionRegistry:
    """The registry shipped with the package."""
    return load_registry(default_registry_text())
