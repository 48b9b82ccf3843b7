"""Named experiment suites expanded into run configs."""

from __future__ import annotations

from ..baselines import BonConfig
from ..core import EvolutionConfig, budget_samples
from .runner import RunConfig

ABLATION_MODEL = "qwen2.5:7b-instruct"
MAIN_MODELS = ("gpt-4o-mini", "qwen2.5:32b-instruct", "mistral:7b-instruct", "qwen2.5:7b-instruct")
SCALE_SETTINGS = ((5, 5), (10, 10), (20, 20), (30, 30), (40, 40), (50, 50))
SPLIT_SETTINGS = ((10, 10), (10, 30), (10, 50), (30, 10), (50, 10))
FE_EVALUATORS = (None, "qwen2.5:7b-instruct", "gpt-4o-mini")
ERROR_LIMITS = (0, 3, 6, 9)
REPLAY_RATES = (0.0, 0.3, 0.6)
DEDUP_ATTEMPTS = (0, 3, 6)
OPERATOR_RATES = ((0.0, 0.0), (0.3, 0.3), (0.6, 0.6))

ALIASES = {"replay": "ep", "dedup": "dd", "operators": "ops"}
ABLATIONS = ("main", "scale", "split", "fe", "ed", "ep", "dd", "ops")


class UnknownAblation(ValueError):
    pass


def _evo(name: str, setting: str, order: int, model: str = ABLATION_MODEL, **changes) -> RunConfig:
    fe = changes.pop("fe", "oracle")
    evaluator = changes.pop("evaluator_model", None)
    return RunConfig(method="evo", name=f"{name}-evo-{setting}", model=model,
                     evolution=EvolutionConfig().replace(**changes), fe=fe,
                     evaluator_model=evaluator,
                     tags={"ablation": name, "setting": setting, "order": order})


def ablation_suite(name: str) -> list[RunConfig]:
    name = ALIASES.get(name, name)
    if name == "main":
        out = []
        n = budget_samples(EvolutionConfig())
        for model in MAIN_MODELS:
            slug = model.replace(":", "-")
            out += [RunConfig(method="dp", name=f"main-dp-{slug}", model=model),
                    RunConfig(method="bon", name=f"main-bon-{slug}", model=model,
                              bon=BonConfig(samples=n)),
                    RunConfig(method="evo", name=f"main-evo-{slug}", model=model)]
        return out
    if name == "scale":
        out = []
        for i, (n_p, n_g) in enumerate(SCALE_SETTINGS):
            setting = f"({n_p},{n_g})"
            evo = _evo(name, setting, i, population_size=n_p, generations=n_g)
            n = budget_samples(evo.evolution)
            out.append(evo)
            out.append(RunConfig(method="bon", name=f"{name}-bon-{setting}", model=ABLATION_MODEL,
                                 bon=BonConfig(samples=n),
                                 tags={"ablation": name, "setting": setting, "order": i}))
        return out
    if name == "split":
        return [_evo(name, f"({n_p},{n_g})", i, population_size=n_p, generations=n_g)
                for i, (n_p, n_g) in enumerate(SPLIT_SETTINGS)]
    if name == "fe":
        return [_evo(name, "oracle" if ev is None else f"llm:{ev}", i,
                     **({} if ev is None else {"fe": "llm", "evaluator_model": ev}))
                for i, ev in enumerate(FE_EVALUATORS)]
    if name == "ed":
        return [_evo(name, f"eps={e}", i, max_detected_errors=e) for i, e in enumerate(ERROR_LIMITS)]
    if name == "ep":
        return [_evo(name, f"rho={r}", i, replay_rate=r) for i, r in enumerate(REPLAY_RATES)]
    if name == "dd":
        return [_evo(name, f"tau={t}", i, max_dedup_attempts=t) for i, t in enumerate(DEDUP_ATTEMPTS)]
    if name == "ops":
        return [_evo(name, f"(xi,mu)=({x},{m})", i, external_crossover_rate=x,
                     external_mutation_rate=m)
                for i, (x, m) in enumerate(OPERATOR_RATES)]
    raise UnknownAblation(f"unknown ablation {name!r}; expected one of {ABLATIONS}")
