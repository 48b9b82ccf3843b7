from .parsing import (
    ExtractionError,
    code_blocks,
    extract_solution_block,
    parse_llm_errors,
    parse_llm_fitness,
)
from .providers import (
    CompletionRequest,
    HttpProvider,
    Provider,
    ProviderAuthError,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
)
from .templates import TEMPLATE_IDS, TemplateError, load_template, render

__all__ = [
    "CompletionRequest", "ExtractionError", "HttpProvider", "Provider", "ProviderAuthError",
    "ProviderError", "RecordingProvider", "ReplayProvider", "ScriptedProvider", "TEMPLATE_IDS",
    "TemplateError", "code_blocks", "extract_solution_block", "load_template", "parse_llm_errors",
    "parse_llm_fitness", "render",
]
