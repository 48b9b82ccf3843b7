"""Direct prompting and best-of-N sampling."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

from .core import Candidate, ConfigError, CallCounter
from .engine import deduplicate
from .llm.providers import Provider
from .llm.session import ProblemSession

DP_TEMPERATURE = 0.0


@dataclass(frozen=True)
class BonConfig:
    samples: int = 345
    temperature: float = 0.7
    max_tokens: int = 4096
    max_dedup_attempts: int = 3

    def __post_init__(self):
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError("samples must be a positive integer")
        if self.max_dedup_attempts < 0:
            raise ConfigError("max_dedup_attempts must be non-negative")
        if self.temperature < 0:
            raise ConfigError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be positive")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BonConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown BonConfig fields: {sorted(unknown)}")
        return cls(**data)


@dataclass
class BaselineResult:
    best: Candidate
    samples: list[Candidate]
    counter: CallCounter

    @property
    def llm_calls(self) -> int:
        return self.counter.calls


def run_dp(instance, plugin, llm: Provider, *, model: str = "gpt-4o-mini",
           max_tokens: int = 4096) -> BaselineResult:
    session = ProblemSession(plugin, instance, llm, model=model,
                             temperature=DP_TEMPERATURE, max_tokens=max_tokens)
    answer = session.direct()
    return BaselineResult(answer, [answer], session.counter)


def run_bon(instance, plugin, llm: Provider, cfg: BonConfig, *,
            model: str = "gpt-4o-mini") -> BaselineResult:
    session = ProblemSession(plugin, instance, llm, model=model,
                             temperature=cfg.temperature, max_tokens=cfg.max_tokens)
    retained: list[Candidate] = []
    for _ in range(cfg.samples):
        retained.append(deduplicate(retained, session.direct(), cfg.max_dedup_attempts,
                                    session.direct))

    def rank(c: Candidate) -> tuple[float, bool]:
        return plugin.oracle_fitness(c, instance), plugin.is_correct(c, instance)

    best = retained[0]
    for c in retained[1:]:
        if rank(c) > rank(best):
            best = c
    return BaselineResult(best, retained, session.counter)
