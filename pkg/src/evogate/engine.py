"""The LLM-driven genetic loop: init, replay, selection, crossover, mutation, archive."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .core import (
    Candidate,
    EvolutionConfig,
    ExperienceEntry,
    PopulationMember,
    replacement_count,
    substream,
)
from .llm.providers import Provider, ProviderError
from .llm.session import ProblemSession

log = logging.getLogger(__name__)

FE_SOURCES = ("oracle", "llm")
ED_SOURCES = ("verifier", "llm")


@dataclass(frozen=True)
class GenerationTrace:
    generation: int
    population: tuple[PopulationMember, ...]
    best_fitness: float
    best_solution: Candidate
    llm_calls_made: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "generation": self.generation,
            "population": [m.to_dict() for m in self.population],
            "best_fitness": self.best_fitness,
            "best_solution": self.best_solution.raw_text,
            "llm_calls_made": self.llm_calls_made,
        }


@dataclass
class RunResult:
    best: PopulationMember
    trace: list[GenerationTrace]
    llm_calls: int
    calls_by_role: dict[str, int] = field(default_factory=dict)

    @property
    def best_fitness(self) -> float:
        return self.best.fitness


class RunAborted(RuntimeError):
    def __init__(self, message: str, trace: list[GenerationTrace]):
        super().__init__(message)
        self.trace = trace


def write_trace(trace: Iterable[GenerationTrace], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for entry in trace:
            fh.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")


class ExperiencePool:
    """Append-only archive of every scored candidate; identical records are stored once."""

    def __init__(self):
        self.entries: list[ExperienceEntry] = []
        self._seen: set = set()

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, members: Iterable[PopulationMember], generation: int) -> None:
        for m in members:
            ident = (m.candidate.key, m.fitness, m.errors)
            if ident in self._seen:
                continue
            self._seen.add(ident)
            self.entries.append(ExperienceEntry(m.candidate, m.fitness, m.errors, generation))

    def ranked(self) -> list[ExperienceEntry]:
        return sorted(self.entries, key=lambda e: -e.fitness)


def deduplicate(existing: Iterable[Candidate], fresh: Candidate, tau: int,
                regenerate: Callable[[], Candidate]) -> Candidate:
    """Regenerate up to ``tau`` times while the candidate duplicates one in ``existing``.

    The first non-duplicate wins; if every regeneration collides the last one is kept.
    """
    seen = {c.key for c in existing}
    candidate = fresh
    attempts = 0
    while candidate.key in seen and attempts < tau:
        candidate = regenerate()
        attempts += 1
    return candidate


def replay_from_pool(population: Sequence[PopulationMember], pool: ExperiencePool,
                     rate: float) -> list[PopulationMember]:
    """Swap the k worst members for the k best archived ones where the archive is strictly better."""
    k = replacement_count(rate, len(population))
    worst_first = sorted(population, key=lambda m: m.fitness)
    best_first = pool.ranked()
    out = []
    for i, member in enumerate(worst_first):
        if i < k and i < len(best_first) and best_first[i].fitness > member.fitness:
            out.append(best_first[i].as_member())
        else:
            out.append(member)
    return out


def select(members: Sequence[PopulationMember], elite_count: int,
           rng: random.Random) -> list[PopulationMember]:
    """Truncation (the ``elite_count`` fittest) followed by pairwise tournaments for the rest."""
    n = len(members)
    if not 0 <= elite_count <= n:
        raise ValueError("elite_count must lie in [0, len(members)]")
    elites = sorted(members, key=lambda m: -m.fitness)[:elite_count]
    winners = []
    for _ in range(n - elite_count):
        x, y = rng.randrange(n), rng.randrange(n)
        # ties go to the second draw
        winners.append(members[x] if members[x].fitness > members[y].fitness else members[y])
    return elites + winners


class Evaluator:
    """Fitness evaluator plus error detector, each oracle/verifier- or LLM-backed."""

    def __init__(self, session: ProblemSession, limit: int, fe: str = "oracle", ed: str = "verifier"):
        if fe not in FE_SOURCES:
            raise ValueError(f"fitness source must be one of {FE_SOURCES}")
        if ed not in ED_SOURCES:
            raise ValueError(f"error detector must be one of {ED_SOURCES}")
        self.session = session
        self.limit = limit
        self.fe = fe
        self.ed = ed

    def __call__(self, candidate: Candidate) -> PopulationMember:
        plugin, instance = self.session.plugin, self.session.instance
        if self.fe == "oracle":
            fitness = plugin.oracle_fitness(candidate, instance)
        else:
            fitness = self.session.llm_fitness(candidate)
        if self.ed == "verifier":
            errors = plugin.detect_errors(candidate, instance, self.limit)
        else:
            errors = self.session.llm_errors(candidate, self.limit)
        return PopulationMember(candidate, fitness, errors)


class Evolution:
    """One run of the loop on one instance. Not reentrant; build one per run."""

    def __init__(self, plugin, instance, config: EvolutionConfig, provider: Provider, *,
                 model: str = "gpt-4o-mini", fe: str = "oracle", ed: str = "verifier",
                 evaluator_model: str | None = None):
        self.plugin = plugin
        self.instance = instance
        self.config = config
        self.session = ProblemSession(plugin, instance, provider, model=model,
                                      temperature=config.llm_temperature,
                                      max_tokens=config.llm_max_tokens,
                                      evaluator_model=evaluator_model)
        self.evaluate = Evaluator(self.session, config.max_detected_errors, fe, ed)
        seed = config.rng_seed
        self.selection_rng = substream(seed, "selection")
        self.crossover_rng = substream(seed, "crossover")
        self.mutation_rng = substream(seed, "mutation")
        self.operator_rng = substream(seed, "operators")

    def initialize_population(self) -> list[PopulationMember]:
        population: list[PopulationMember] = []
        while len(population) < self.config.population_size:
            child = deduplicate([m.candidate for m in population], self.session.direct(),
                                self.config.max_dedup_attempts, self.session.direct)
            population.append(self.evaluate(child))
        return population

    def crossover_phase(self, selected: Sequence[PopulationMember]) -> list[PopulationMember]:
        cfg, rng = self.config, self.crossover_rng

        def make_child() -> Candidate:
            a = selected[rng.randrange(len(selected))]
            b = selected[rng.randrange(len(selected))]
            if rng.random() < cfg.crossover_rate:
                if rng.random() < cfg.external_crossover_rate:
                    return self.plugin.external_crossover(a.candidate, b.candidate,
                                                          self.instance, self.operator_rng)
                return self.session.crossover(a, b)
            return (a if rng.random() < 0.5 else b).candidate

        offspring: list[PopulationMember] = []
        while len(offspring) < cfg.population_size:
            child = deduplicate([m.candidate for m in offspring], make_child(),
                                cfg.max_dedup_attempts, make_child)
            offspring.append(self.evaluate(child))
        return offspring

    def mutation_phase(self, offspring: Sequence[PopulationMember]) -> list[PopulationMember]:
        cfg, rng = self.config, self.mutation_rng
        mutated: list[PopulationMember] = []

        def make_child() -> Candidate:
            source = offspring[len(mutated)]
            if rng.random() < cfg.mutation_rate:
                if rng.random() < cfg.external_mutation_rate:
                    return self.plugin.external_mutation(source.candidate, self.instance,
                                                         self.operator_rng)
                return self.session.mutate(source)
            return source.candidate

        while len(mutated) < cfg.population_size:
            child = deduplicate([m.candidate for m in mutated], make_child(),
                                cfg.max_dedup_attempts, make_child)
            mutated.append(self.evaluate(child))
        return mutated

    def run(self, on_generation: Callable[[GenerationTrace], None] | None = None) -> RunResult:
        cfg = self.config
        trace: list[GenerationTrace] = []
        best: PopulationMember | None = None

        def record(generation: int, population: list[PopulationMember]) -> None:
            nonlocal best
            for m in population:
                if best is None or m.fitness > best.fitness:
                    best = m
            entry = GenerationTrace(generation, tuple(population), best.fitness,
                                    best.candidate, self.session.calls)
            trace.append(entry)
            if on_generation:
                on_generation(entry)

        try:
            population = self.initialize_population()
            pool = ExperiencePool()
            pool.add(population, 0)
            record(0, population)
            for generation in range(1, cfg.generations + 1):
                if best.fitness >= cfg.fitness_threshold:
                    break
                population = replay_from_pool(population, pool, cfg.replay_rate)
                selected = select(population, cfg.elite_count, self.selection_rng)
                offspring = self.crossover_phase(selected)
                population = self.mutation_phase(offspring)
                pool.add(population, generation)
                record(generation, population)
        except ProviderError as exc:
            raise RunAborted(f"provider failure after {len(trace)} completed stage(s): {exc}",
                             trace) from exc
        return RunResult(best, trace, self.session.calls, dict(self.session.counter.by_role))


def run(instance, config: EvolutionConfig, plugin, llm: Provider, **kw: Any) -> RunResult:
    return Evolution(plugin, instance, config, llm, **kw).run()
