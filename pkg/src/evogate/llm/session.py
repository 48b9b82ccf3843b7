"""Problem-bound prompting: renders the right template, calls the provider, parses the answer."""

from __future__ import annotations

import logging
from typing import Any

from ..core import CallCounter, Candidate, ErrorReport, PopulationMember, SyntaxFailure
from .parsing import ExtractionError, extract_solution_block, parse_llm_errors, parse_llm_fitness
from .providers import CompletionRequest, Provider
from .templates import render

log = logging.getLogger(__name__)


def format_score(score: float) -> str:
    return str(round(score, 2))


class ProblemSession:
    def __init__(self, plugin, instance, provider: Provider, *, model: str = "gpt-4o-mini",
                 temperature: float = 0.7, max_tokens: int = 4096,
                 evaluator_model: str | None = None, evaluator_temperature: float = 0.0):
        self.plugin = plugin
        self.instance = instance
        self.provider = provider
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.evaluator_model = evaluator_model or model
        self.evaluator_temperature = evaluator_temperature
        self.bindings = plugin.prompt_bindings(instance)
        self.counter = CallCounter()

    @property
    def calls(self) -> int:
        return self.counter.calls

    def ask(self, role: str, extra: dict[str, Any] | None = None, *,
            temperature: float | None = None, model: str | None = None) -> str:
        template_id = f"{self.plugin.kind}_{role}"
        bindings = {**self.bindings, **(extra or {})}
        request = CompletionRequest(
            prompt=render(template_id, bindings),
            temperature=self.temperature if temperature is None else temperature,
            max_tokens=self.max_tokens,
            model=model or self.model,
            template_id=template_id,
            bindings=bindings,
        )
        self.counter.add(role)
        return self.provider.complete(request)

    def to_candidate(self, response: str) -> Candidate:
        try:
            block = extract_solution_block(response)
        except ExtractionError as exc:
            return Candidate(response, SyntaxFailure(str(exc)))
        return self.plugin.parse(block, self.instance)

    def direct(self, temperature: float | None = None) -> Candidate:
        return self.to_candidate(self.ask("dp", temperature=temperature))

    def crossover(self, a: PopulationMember, b: PopulationMember) -> Candidate:
        return self.to_candidate(self.ask("lco", {
            "c1": a.candidate.raw_text, "s1": format_score(a.fitness), "c1_error": a.errors.render(),
            "c2": b.candidate.raw_text, "s2": format_score(b.fitness), "c2_error": b.errors.render(),
        }))

    def mutate(self, m: PopulationMember) -> Candidate:
        return self.to_candidate(self.ask("lmo", {
            "candidate": m.candidate.raw_text, "score": format_score(m.fitness),
            "error": m.errors.render(),
        }))

    def llm_fitness(self, candidate: Candidate) -> float:
        text = self.ask("fe", {"candidate": candidate.raw_text},
                        temperature=self.evaluator_temperature, model=self.evaluator_model)
        try:
            return parse_llm_fitness(text)
        except ExtractionError:
            log.warning("fitness evaluator gave no number; scoring 0")
            return 0.0

    def llm_errors(self, candidate: Candidate, limit: int) -> ErrorReport:
        text = self.ask("ed", {"candidate": candidate.raw_text},
                        temperature=self.evaluator_temperature, model=self.evaluator_model)
        return parse_llm_errors(text, self.plugin.kind).truncated(limit)
