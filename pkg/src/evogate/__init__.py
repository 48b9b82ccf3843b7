"""LLM-driven genetic search over constraint and routing problems."""

from .baselines import BonConfig, run_bon, run_dp
from .core import (
    Candidate,
    ConfigError,
    EvolutionConfig,
    PopulationMember,
    SyntaxFailure,
    budget_samples,
    compute_llm_budget,
)
from .engine import Evolution, ExperiencePool, GenerationTrace, RunAborted, deduplicate, run
from .problems import get_plugin

__version__ = "0.1.0"

__all__ = [
    "BonConfig", "Candidate", "ConfigError", "Evolution", "EvolutionConfig", "ExperiencePool",
    "GenerationTrace", "PopulationMember", "RunAborted", "SyntaxFailure", "budget_samples",
    "compute_llm_budget", "deduplicate", "get_plugin", "run", "run_bon", "run_dp",
]
