"""Shared domain types for the evolutionary loop and the problem plugins."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Protocol


class ConfigError(ValueError):
    pass


def _exact(x: float | int) -> Fraction:
    # decimal literal semantics: 0.7 is 7/10, not the nearest binary float
    return Fraction(str(x))


def round_half_up(x: float | Fraction) -> int:
    x = x if isinstance(x, Fraction) else _exact(x)
    return math.floor(x + Fraction(1, 2))


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 30
    generations: int = 15
    elite_count: int | None = None
    max_detected_errors: int = 3
    replay_rate: float = 0.6
    max_dedup_attempts: int = 3
    crossover_rate: float = 0.7
    external_crossover_rate: float = 0.3
    mutation_rate: float = 0.3
    external_mutation_rate: float = 0.3
    fitness_threshold: float = 100.0
    llm_temperature: float = 0.7
    llm_max_tokens: int = 4096
    rng_seed: int = 0

    def __post_init__(self):
        if self.elite_count is None:
            object.__setattr__(self, "elite_count", math.ceil(self.population_size / 10))
        self.validate()

    def validate(self) -> None:
        def check(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        for name in ("population_size", "generations", "elite_count", "max_detected_errors",
                     "max_dedup_attempts", "llm_max_tokens", "rng_seed"):
            value = getattr(self, name)
            check(isinstance(value, int) and not isinstance(value, bool), f"{name} must be an integer")
        check(self.population_size >= 1, "population_size must be positive")
        check(self.generations >= 0, "generations must be non-negative")
        check(0 <= self.elite_count <= self.population_size, "elite_count must lie in [0, population_size]")
        check(self.max_detected_errors >= 0, "max_detected_errors must be non-negative")
        check(self.max_dedup_attempts >= 0, "max_dedup_attempts must be non-negative")
        for name in ("replay_rate", "crossover_rate", "external_crossover_rate",
                     "mutation_rate", "external_mutation_rate"):
            check(0.0 <= getattr(self, name) <= 1.0, f"{name} must lie in [0, 1]")
        check(0.0 <= self.fitness_threshold <= 100.0, "fitness_threshold must lie in [0, 100]")
        check(self.llm_temperature >= 0.0, "llm_temperature must be non-negative")
        check(self.llm_max_tokens >= 1, "llm_max_tokens must be positive")
        check(0 <= self.rng_seed < 2**64, "rng_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvolutionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown EvolutionConfig fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "EvolutionConfig":
        return cls.from_dict(json.loads(text))

    def replace(self, **changes: Any) -> "EvolutionConfig":
        data = self.to_dict()
        if "population_size" in changes and "elite_count" not in changes:
            data["elite_count"] = None
        data.update(changes)
        return EvolutionConfig(**data)


def _budget_exact(config: EvolutionConfig) -> Fraction:
    n_p = config.population_size
    per_gen = (n_p * _exact(config.crossover_rate) * (1 - _exact(config.external_crossover_rate))
               + n_p * _exact(config.mutation_rate) * (1 - _exact(config.external_mutation_rate)))
    return n_p + per_gen * config.generations


def compute_llm_budget(config: EvolutionConfig) -> float:
    """Upper bound L on LLM calls per problem (excluding dedup retries and LLM-based FE/ED)."""
    return float(_budget_exact(config))


def budget_samples(config: EvolutionConfig) -> int:
    """L rounded half-up, the matched Best-of-N sample count."""
    return round_half_up(_budget_exact(config))


def replacement_count(rate: float, n: int) -> int:
    return math.floor(_exact(rate) * n)


# ---------------------------------------------------------------------------
# Candidates

@dataclass(frozen=True)
class SyntaxFailure:
    reason: str = ""


@dataclass(frozen=True)
class Candidate:
    """A proposed answer: the solution text and its parsed form.

    ``raw_text`` is the solution block (what gets embedded back into prompts),
    not the whole model response.
    """

    raw_text: str
    parsed: Any

    @property
    def ok(self) -> bool:
        return not isinstance(self.parsed, SyntaxFailure)

    @property
    def key(self) -> tuple:
        # canonical parsed form when available, so whitespace variants collide
        if self.ok:
            return ("parsed", self.parsed)
        return ("raw", self.raw_text)


# ---------------------------------------------------------------------------
# Error reports

@dataclass(frozen=True)
class ErrorReport:
    syntax_error: bool = False

    @property
    def clean(self) -> bool:
        raise NotImplementedError

    def truncated(self, limit: int) -> "ErrorReport":
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **asdict(self)}

    kind = "base"


@dataclass(frozen=True)
class SudokuErrors(ErrorReport):
    # (row, col, constraint) with constraint 0=row, 1=col, 2=subgrid
    cells: tuple[tuple[int, int, int], ...] = ()

    kind = "sudoku"
    CONSTRAINTS = ("row", "col", "subgrid")

    @property
    def clean(self) -> bool:
        return not self.syntax_error and not self.cells

    @property
    def positions(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.cells}

    def truncated(self, limit: int) -> "SudokuErrors":
        return SudokuErrors(self.syntax_error, self.cells[:limit])

    def render(self) -> str:
        if self.syntax_error:
            return "Syntax is wrong"
        if not self.cells:
            return "No errors"
        return "\n".join(f"{i},{j},{self.CONSTRAINTS[t]}" for i, j, t in self.cells)

    @classmethod
    def from_dict(cls, d: dict) -> "SudokuErrors":
        return cls(bool(d["syntax_error"]), tuple(tuple(c) for c in d["cells"]))


@dataclass(frozen=True)
class ColoringErrors(ErrorReport):
    conflict_edges: tuple[tuple[int, int], ...] = ()
    excess_colors: int = 0

    kind = "coloring"

    @property
    def clean(self) -> bool:
        return not self.syntax_error and not self.conflict_edges and self.excess_colors <= 0

    def truncated(self, limit: int) -> "ColoringErrors":
        return ColoringErrors(self.syntax_error, self.conflict_edges[:limit], self.excess_colors)

    def render(self) -> str:
        if self.syntax_error:
            return "Syntax is wrong"
        if self.clean:
            return "No errors"
        lines = ["Conflicted edges (vertex,vertex):"]
        lines += [f"{u},{v}" for u, v in self.conflict_edges] or ["none listed"]
        lines.append(f"Exceeded colors: {self.excess_colors}")
        return "\n".join(lines)

    @classmethod
    def from_dict(cls, d: dict) -> "ColoringErrors":
        return cls(bool(d["syntax_error"]), tuple(tuple(e) for e in d["conflict_edges"]),
                   int(d["excess_colors"]))


@dataclass(frozen=True)
class RouteErrors(ErrorReport):
    missing_cities: tuple[int, ...] = ()
    excess_distance: float = 0.0

    kind = "route"
    TOLERANCE = 1e-9

    @property
    def clean(self) -> bool:
        return (not self.syntax_error and not self.missing_cities
                and abs(self.excess_distance) <= self.TOLERANCE)

    def truncated(self, limit: int) -> "RouteErrors":
        return RouteErrors(self.syntax_error, self.missing_cities[:limit], self.excess_distance)

    def render(self) -> str:
        if self.syntax_error:
            return "Syntax is wrong"
        if self.clean:
            return "No errors"
        missing = ",".join(str(c) for c in self.missing_cities) or "none listed"
        return f"Missing cities: {missing}\nExceeded distance: {self.excess_distance:.2f}"

    @classmethod
    def from_dict(cls, d: dict) -> "RouteErrors":
        return cls(bool(d["syntax_error"]), tuple(d["missing_cities"]), float(d["excess_distance"]))


def error_report_from_dict(d: dict) -> ErrorReport:
    by_kind = {c.kind: c for c in (SudokuErrors, ColoringErrors, RouteErrors)}
    return by_kind[d["kind"]].from_dict(d)


# ---------------------------------------------------------------------------
# Population records

@dataclass(frozen=True)
class PopulationMember:
    candidate: Candidate
    fitness: float
    errors: ErrorReport

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.candidate.raw_text, "fitness": self.fitness,
                "errors": self.errors.to_dict()}


@dataclass(frozen=True)
class ExperienceEntry:
    candidate: Candidate
    fitness: float
    errors: ErrorReport
    generation_added: int

    def as_member(self) -> PopulationMember:
        return PopulationMember(self.candidate, self.fitness, self.errors)


# ---------------------------------------------------------------------------
# Problem plugin contract

class ProblemPlugin(Protocol):
    """What each benchmark problem must provide to the engine and harness."""

    kind: str  # "sk" | "gc" | "tsp"

    def parse(self, text: str, instance: Any) -> Candidate: ...
    def format_solution(self, parsed: Any) -> str: ...
    def prompt_bindings(self, instance: Any) -> dict[str, Any]: ...
    def oracle_fitness(self, candidate: Candidate, instance: Any) -> float: ...
    def detect_errors(self, candidate: Candidate, instance: Any, limit: int) -> ErrorReport: ...
    def empty_errors(self) -> ErrorReport: ...
    def external_crossover(self, c1: Candidate, c2: Candidate, instance: Any,
                           rng: random.Random) -> Candidate: ...
    def external_mutation(self, c: Candidate, instance: Any, rng: random.Random) -> Candidate: ...
    def metrics(self, candidate: Candidate, instance: Any) -> dict[str, float | None]: ...
    def is_correct(self, candidate: Candidate, instance: Any) -> bool: ...
    def generate_instance(self, rng: random.Random) -> Any: ...
    def instance_to_dict(self, instance: Any) -> dict[str, Any]: ...
    def instance_from_dict(self, data: dict[str, Any]) -> Any: ...
    def validate_instance(self, instance: Any) -> None: ...
    def synthetic_answer(self, instance: Any, rng: random.Random) -> str: ...


def substream(seed: int, name: str) -> random.Random:
    """Independent named RNG stream derived from one root seed."""
    return random.Random(f"evogate:{seed}:{name}")


@dataclass
class CallCounter:
    calls: int = 0
    by_role: dict[str, int] = field(default_factory=dict)

    def add(self, role: str) -> None:
        self.calls += 1
        self.by_role[role] = self.by_role.get(role, 0) + 1
