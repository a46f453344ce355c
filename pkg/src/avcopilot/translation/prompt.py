"""Prompt assembly for the translation stage.

A prompt bundle is assembled deterministically from up to four sections, in
fixed order: the knowledge base (role description, DSL grammar, action
catalog), an optional rendering of the current vehicle status, an optional
list of in-context example pairs, and the instruction itself.  The ablation
mode controls which optional sections are present.

ICL examples file format: blank-line separated blocks, each a line
``instruction: <text>`` followed by the expected DSL document indented by
two spaces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from ..dsl import parse_command
from ..simulation import AvStatus


class AblationMode(Enum):
    """Which optional prompt inputs are included."""

    BASELINE = "baseline"
    NO_STATUS = "no-status"
    ZERO_SHOT = "zero-shot"
    KB_ONLY = "kb-only"

    @property
    def includes_status(self) -> bool:
        return self in (AblationMode.BASELINE, AblationMode.ZERO_SHOT)

    @property
    def includes_icl(self) -> bool:
        return self in (AblationMode.BASELINE, AblationMode.NO_STATUS)


@dataclass(frozen=True)
class Instruction:
    text: str
    session: str = "default"
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("instruction text must be non-empty")


@dataclass(frozen=True)
class IclExample:
    instruction: str
    dsl_text: str


@dataclass(frozen=True)
class PromptBundle:
    knowledge_base: str
    status_text: str | None
    examples: tuple[IclExample, ...]
    instruction_text: str

    def render(self) -> str:
        sections = ["# Role and output format", self.knowledge_base.strip()]
        if self.status_text is not None:
            sections += ["# Current vehicle status", self.status_text.strip()]
        if self.examples:
            rendered = []
            for example in self.examples:
                rendered.append(f"Instruction: {example.instruction}\n{example.dsl_text.strip()}")
            sections += ["# Examples", "\n\n".join(rendered)]
        sections += ["# Instruction", self.instruction_text.strip()]
        return "\n\n".join(sections) + "\n"


def assemble_prompt(
    kb: str,
    status: AvStatus | str | None,
    icl: tuple[IclExample, ...] | list[IclExample] | None,
    instruction: Instruction | str,
    mode: AblationMode = AblationMode.BASELINE,
) -> PromptBundle:
    """Assemble the bundle, dropping sections per the ablation mode."""
    status_text: str | None = None
    if mode.includes_status and status is not None:
        status_text = status if isinstance(status, str) else status.render_text()
    examples: tuple[IclExample, ...] = ()
    if mode.includes_icl and icl:
        examples = tuple(icl)
    text = instruction.text if isinstance(instruction, Instruction) else instruction
    return PromptBundle(
        knowledge_base=kb,
        status_text=status_text,
        examples=examples,
        instruction_text=text,
    )


def load_icl_examples(text: str) -> tuple[IclExample, ...]:
    examples: list[IclExample] = []
    for block in text.split("\n\n"):
        lines = [l for l in block.split("\n") if l.strip() and not l.startswith("#")]
        if not lines:
            continue
        if not lines[0].startswith("instruction: "):
            raise ValueError(f"ICL block must start with 'instruction: ': {lines[0]!r}")
        instruction = lines[0][len("instruction: ") :]
        doc_lines = []
        for line in lines[1:]:
            if not line.startswith("  "):
                raise ValueError(f"ICL DSL lines must be indented by two spaces: {line!r}")
            doc_lines.append(line[2:])
        doc = "\n".join(doc_lines) + "\n"
        parse_command(doc)  # reject unparseable ground truth at load time
        examples.append(IclExample(instruction=instruction, dsl_text=doc))
    return tuple(examples)


def _data_text(name: str) -> str:
    from importlib.resources import files

    return files("avcopilot.data").joinpath(name).read_text(encoding="utf-8")


def default_knowledge_base() -> str:
    return _data_text("kb.txt")


def default_icl_examples() -> tuple[IclExample, ...]:
    return load_icl_examples(_data_text("icl.txt"))
