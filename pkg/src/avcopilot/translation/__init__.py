"""Stage-1 instruction translation and stage-2 feedback generation."""

from .prompt import (
    AblationMode,
    IclExample,
    Instruction,
    PromptBundle,
    assemble_prompt,
    default_icl_examples,
    default_knowledge_base,
    load_icl_examples,
)
from .rules import RuleTable, load_rules, default_rules
from .feedback import FeedbackMessage, TemplateTable, load_templates, default_templates
from .backends import (
    BackendUnavailable,
    HttpBackend,
    RuleBackend,
    TranslationBackend,
    TranslationError,
    UnparseableResponse,
    default_rule_backend,
)

__all__ = [
    "AblationMode",
    "BackendUnavailable",
    "FeedbackMessage",
    "HttpBackend",
    "IclExample",
    "Instruction",
    "PromptBundle",
    "RuleBackend",
    "RuleTable",
    "TemplateTable",
    "TranslationBackend",
    "TranslationError",
    "UnparseableResponse",
    "assemble_prompt",
    "default_icl_examples",
    "default_knowledge_base",
    "default_rule_backend",
    "default_rules",
    "default_templates",
    "load_icl_examples",
    "load_rules",
    "load_templates",
]
