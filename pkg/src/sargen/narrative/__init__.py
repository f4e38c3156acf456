"""SAR narrative drafting via a pluggable language-model adapter."""

from .adapter import (
    SECTION_ORDER,
    AdapterCapabilities,
    GenerationParams,
    HttpGatewayAdapter,
    LlmAdapter,
    MockAdapter,
    build_adapter,
)
from .confidence import ChecklistItem, ConfidenceScore, assign_confidence, combine, parse_checklist
from .engine import (
    ChainOfThoughtTrace,
    DraftIntro,
    NarrativeDraft,
    TraceStep,
    generate_draft,
    parse_adapter_output,
)
from .prompt import FeedbackNote, Prompt, PromptInputs, build_prompt, money_line
from .render import SarDocument, render_sar, render_trace

__all__ = [
    "SECTION_ORDER",
    "AdapterCapabilities",
    "ChainOfThoughtTrace",
    "ChecklistItem",
    "ConfidenceScore",
    "DraftIntro",
    "FeedbackNote",
    "GenerationParams",
    "HttpGatewayAdapter",
    "LlmAdapter",
    "MockAdapter",
    "NarrativeDraft",
    "Prompt",
    "PromptInputs",
    "SarDocument",
    "TraceStep",
    "assign_confidence",
    "build_adapter",
    "build_prompt",
    "combine",
    "generate_draft",
    "money_line",
    "parse_adapter_output",
    "parse_checklist",
    "render_sar",
    "render_trace",
]
