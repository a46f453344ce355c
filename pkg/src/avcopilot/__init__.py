"""avcopilot: natural-language co-pilot for a simulated modular AV stack.

Passenger instructions are translated into a category-based command DSL,
validated against an explicit action registry, executed on a deterministic
planning-simulation kernel, and answered with feedback generated from the
definitive execution outcome.
"""

from .dsl import (
    Category,
    ExtractedCommand,
    ParseError,
    command,
    out_of_scope,
    parse_command,
    serialize_command,
)
from .registry import ActionRegistry, ActionSpec, ParamSpec, RegistryError, default_registry, load_registry

__version__ = "0.1.0"

__all__ = [
    "ActionRegistry",
    "ActionSpec",
    "Category",
    "ExtractedCommand",
    "ParamSpec",
    "ParseError",
    "RegistryError",
    "command",
    "default_registry",
    "load_registry",
    "out_of_scope",
    "parse_command",
    "serialize_command",
]
