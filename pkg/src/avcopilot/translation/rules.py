"""Deterministic keyword-rule translation backend (stage 1).

The rule table is an ordered list of records; the first matching rule wins
and no match at all yields the OUT_OF_SCOPE command.  Rules file format
(``#`` comments, rules separated by blank lines)::

    rule <CATEGORY> <ACTION>
      match: <phrase> | <phrase> | ...
      number: <param> <unitclass>
      choice: <param> <w1|w2|...>
      const: <param> <value>

* every ``match:`` line is an OR-group of phrases; a rule matches only if
  every group matches (AND of ORs).  Phrases match as contiguous token
  subsequences of the case-folded instruction.
* ``number:`` captures the first number in the instruction and converts it
  to the rule's unit class (``kmh``, ``m``, ``ms2`` or ``none``) using any
  unit words that follow the number; the capture is required.
* ``choice:`` captures the first instruction token found in the listed
  word set; required.
* ``const:`` sets a fixed parameter value (used e.g. to pin relative
  phrasings like "keep more distance" to preset values).

Matching is a pure function of the instruction text, so translations are
reproducible across runs and platforms and do not depend on vehicle state.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..dsl import Category, ExtractedCommand, Scalar

_NUMBER_TOKEN = re.compile(r"[+-]?\d+(?:\.\d+)?")

# Unit phrases per unit class: token tuple -> factor into the class unit.
_UNIT_TABLES: dict[str, dict[tuple[str, ...], float]] = {
    "kmh": {
        ("km/h",): 1.0,
        ("kmh",): 1.0,
        ("kph",): 1.0,
        ("km", "per", "hour"): 1.0,
        ("kilometers", "per", "hour"): 1.0,
        ("kilometres", "per", "hour"): 1.0,
        ("m/s",): 3.6,
        ("mps",): 3.6,
        ("meters", "per", "second"): 3.6,
        ("metres", "per", "second"): 3.6,
        ("mph",): 1.609344,
        ("miles", "per", "hour"): 1.609344,
    },
    "m": {
        ("m",): 1.0,
        ("meter",): 1.0,
        ("meters",): 1.0,
        ("metre",): 1.0,
        ("metres",): 1.0,
    },
    "ms2": {
        ("m/s2",): 1.0,
        ("m/s/s",): 1.0,
        ("meters", "per", "second", "squared"): 1.0,
        ("metres", "per", "second", "squared"): 1.0,
    },
    "none": {},
}


class RulesError(ValueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class NumberCapture:
    param: str
    unit_class: str


@dataclass(frozen=True)
class ChoiceCapture:
    param: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class ConstParam:
    param: str
    value: Scalar


@dataclass(frozen=True)
class Rule:
    category: Category
    action: str
    groups: tuple[tuple[tuple[str, ...], ...], ...]  # AND of ORs of phrases
    captures: tuple[NumberCapture | ChoiceCapture | ConstParam, ...]


def normalize(text: str) -> list[str]:
    """Case-fold an instruction into matchable tokens."""
    text = text.lower().replace("²", "2")
    text = re.sub(r"(?<=\d)(?=[a-z])", " ", text)
    text = re.sub(r"[^a-z0-9./+-]+", " ", text)
    tokens = []
    for token in text.split():
        token = token.strip(".-+/")
        if token:
            tokens.append(token)
    return tokens


def _contains_phrase(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    n = len(phrase)
    return any(tuple(tokens[i : i + n]) == phrase for i in range(len(tokens) - n + 1))


def _capture_number(tokens: list[str], unit_class: str) -> float | None:
    table = _UNIT_TABLES[unit_class]
    for i, token in enumerate(tokens):
        if not _NUMBER_TOKEN.fullmatch(token):
            continue
        value = float(token)
        factor = 1.0
        best_len = 0
        for phrase, f in table.items():
            n = len(phrase)
            if n > best_len and tuple(tokens[i + 1 : i + 1 + n]) == phrase:
                factor, best_len = f, n
        converted = round(value * factor, 6)
        return converted if math.isfinite(converted) else None
    return None


def _capture_choice(tokens: list[str], words: tuple[str, ...]) -> str | None:
    wordset = set(words)
    for token in tokens:
        if token in wordset:
            return token
    return None


class RuleTable:
    def __init__(self, rules: list[Rule]):
        self.rules = tuple(rules)

    def translate_text(self, text: str) -> ExtractedCommand:
        """First-match-wins translation; no match means OUT_OF_SCOPE."""
        tokens = normalize(text)
        for rule in self.rules:
            command = self._try_rule(rule, tokens)
            if command is not None:
                return command
        return ExtractedCommand(category=Category.OUT_OF_SCOPE)

    @staticmethod
    def _try_rule(rule: Rule, tokens: list[str]) -> ExtractedCommand | None:
        for group in rule.groups:
            if not any(_contains_phrase(tokens, phrase) for phrase in group):
                return None
        params: list[tuple[str, Scalar]] = []
        for capture in rule.captures:
            if isinstance(capture, NumberCapture):
                value = _capture_number(tokens, capture.unit_class)
                if value is None:
                    return None
                params.append((capture.param, value))
            elif isinstance(capture, ChoiceCapture):
                word = _capture_choice(tokens, capture.words)
                if word is None:
                    return None
                params.append((capture.param, word))
            else:
                params.append((capture.param, capture.value))
        return ExtractedCommand(
            category=rule.category, action=rule.action, parameters=tuple(params)
        )


def _parse_const_value(raw: str) -> Scalar:
    if _NUMBER_TOKEN.fullmatch(raw):
        return float(raw)
    return raw


def load_rules(text: str) -> RuleTable:
    rules: list[Rule] = []
    header: tuple[Category, str] | None = None
    groups: list[tuple[tuple[str, ...], ...]] = []
    captures: list[NumberCapture | ChoiceCapture | ConstParam] = []

    def close(line_no: int) -> None:
        nonlocal header, groups, captures
        if header is None:
            return
        if not groups:
            raise RulesError(line_no, f"rule {header[1]} has no match groups")
        rules.append(
            Rule(
                category=header[0],
                action=header[1],
                groups=tuple(groups),
                captures=tuple(captures),
            )
        )
        header, groups, captures = None, [], []

    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("rule "):
            close(idx)
            fields = line.split()
            if len(fields) != 3:
                raise RulesError(idx, f"malformed rule header: {line!r}")
            try:
                category = Category(fields[1])
            except ValueError:
                raise RulesError(idx, f"unknown category {fields[1]!r}")
            header = (category, fields[2])
        elif header is None:
            raise RulesError(idx, f"directive outside a rule: {line!r}")
        elif line.startswith("match:"):
            phrases = []
            for alt in line[len("match:") :].split("|"):
                tokens = tuple(normalize(alt))
                if tokens:
                    phrases.append(tokens)
            if not phrases:
                raise RulesError(idx, "empty match group")
            groups.append(tuple(phrases))
        elif line.startswith("number:"):
            fields = line[len("number:") :].split()
            if len(fields) != 2 or fields[1] not in _UNIT_TABLES:
                raise RulesError(idx, f"malformed number capture: {line!r}")
            captures.append(NumberCapture(param=fields[0], unit_class=fields[1]))
        elif line.startswith("choice:"):
            fields = line[len("choice:") :].split(None, 1)
            if len(fields) != 2:
                raise RulesError(idx, f"malformed choice capture: {line!r}")
            words = tuple(w.strip() for w in fields[1].split("|") if w.strip())
            if not words:
                raise RulesError(idx, "choice capture needs words")
            captures.append(ChoiceCapture(param=fields[0], words=words))
        elif line.startswith("const:"):
            fields = line[len("const:") :].split(None, 1)
            if len(fields) != 2:
                raise RulesError(idx, f"malformed const: {line!r}")
            captures.append(ConstParam(param=fields[0], value=_parse_const_value(fields[1].strip())))
        else:
            raise RulesError(idx, f"unrecognized directive: {line!r}")

    close(len(text.split("\n")))
    return RuleTable(rules)


def default_rules() -> RuleTable:
    from importlib.resources import files

    return load_rules(files("avcopilot.data").joinpath("rules.txt").read_text(encoding="utf-8"))
