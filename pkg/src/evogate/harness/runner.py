"""Runs one method over every instance of a dataset and persists results as flat files.

Layout of a run directory::

    manifest.json            run-level summary, rewritten after every instance
    instances/<id>.json      per-instance result (written atomically)
    traces/<id>.jsonl        per-generation trace for evolution runs
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..baselines import BonConfig, run_bon, run_dp
from ..core import ConfigError, EvolutionConfig, budget_samples, compute_llm_budget
from ..engine import Evolution, RunAborted, write_trace
from ..llm.providers import (
    HttpProvider,
    Provider,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
)
from .datasets import dump_json, load_dataset, write_atomic
from .synthetic import synthetic_provider

log = logging.getLogger(__name__)

METHODS = ("dp", "bon", "evo")
PROVIDERS = ("live", "scripted", "replay")
DEFAULT_MODEL = "gpt-4o-mini"


@dataclass
class RunConfig:
    method: str
    name: str | None = None
    model: str = DEFAULT_MODEL
    evaluator_model: str | None = None
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    bon: BonConfig = field(default_factory=BonConfig)
    fe: str = "oracle"
    ed: str = "verifier"
    provider: str = "scripted"
    script: str | None = None  # scripted response file or replay fixture
    record: bool = False
    seed: int = 0
    workers: int = 1
    tags: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.provider not in PROVIDERS:
            raise ConfigError(f"provider must be one of {PROVIDERS}")
        if self.provider == "replay" and not self.script:
            raise ConfigError("replay provider needs a fixture path in 'script'")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if isinstance(self.evolution, dict):
            self.evolution = EvolutionConfig.from_dict(self.evolution)
        if isinstance(self.bon, dict):
            self.bon = BonConfig.from_dict(self.bon)

    def method_config(self) -> dict[str, Any]:
        if self.method == "evo":
            return {"evolution": self.evolution.to_dict(), "fe": self.fe, "ed": self.ed,
                    "evaluator_model": self.evaluator_model}
        if self.method == "bon":
            return {"bon": self.bon.to_dict()}
        return {}

    def config_hash(self) -> str:
        # only what changes the outcome; worker count and naming do not
        payload = {"method": self.method, "model": self.model, "seed": self.seed,
                   "provider": self.provider, "script": self.script, **self.method_config()}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    @property
    def run_id(self) -> str:
        return self.name or f"{self.method}-{self.config_hash()}"

    def to_dict(self) -> dict[str, Any]:
        return {"method": self.method, "name": self.name, "model": self.model,
                "evaluator_model": self.evaluator_model,
                "evolution": self.evolution.to_dict(), "bon": self.bon.to_dict(),
                "fe": self.fe, "ed": self.ed, "provider": self.provider, "script": self.script,
                "record": self.record, "seed": self.seed, "workers": self.workers,
                "tags": self.tags}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown run config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_provider(cfg: RunConfig, plugin, instance, instance_id: str, run_dir: Path) -> Provider:
    if cfg.provider == "live":
        provider: Provider = HttpProvider()
        if cfg.record:
            provider = RecordingProvider(provider, run_dir / "recordings" / f"{instance_id}.jsonl")
        return provider
    if cfg.provider == "replay":
        path = Path(cfg.script)
        per_instance = path / f"{instance_id}.jsonl" if path.is_dir() else path
        return ReplayProvider(per_instance)
    if cfg.script:
        return ScriptedProvider.from_file(cfg.script)
    return synthetic_provider(plugin, instance, cfg.seed, instance_id)


def solve_instance(cfg: RunConfig, plugin, instance, instance_id: str,
                   run_dir: Path) -> dict[str, Any]:
    provider = make_provider(cfg, plugin, instance, instance_id, run_dir)
    start = time.perf_counter()
    record: dict[str, Any] = {"instance_id": instance_id, "config_hash": cfg.config_hash()}
    try:
        if cfg.method == "dp":
            res = run_dp(instance, plugin, provider, model=cfg.model)
            best, calls, by_role = res.best, res.llm_calls, res.counter.by_role
        elif cfg.method == "bon":
            res = run_bon(instance, plugin, provider, cfg.bon, model=cfg.model)
            best, calls, by_role = res.best, res.llm_calls, res.counter.by_role
        else:
            evo_cfg = cfg.evolution.replace(rng_seed=_instance_seed(cfg.evolution.rng_seed, instance_id))
            engine = Evolution(plugin, instance, evo_cfg, provider, model=cfg.model, fe=cfg.fe,
                               ed=cfg.ed, evaluator_model=cfg.evaluator_model)
            trace_path = run_dir / "traces" / f"{instance_id}.jsonl"
            trace_path.parent.mkdir(parents=True, exist_ok=True)
            try:
                out = engine.run()
            except RunAborted as exc:
                write_trace(exc.trace, trace_path)
                raise
            write_trace(out.trace, trace_path)
            best, calls, by_role = out.best.candidate, out.llm_calls, out.calls_by_role
            record["generations_run"] = len(out.trace) - 1
    except (ProviderError, RunAborted) as exc:
        log.error("instance %s failed: %s", instance_id, exc)
        record.update(status="failed", error=str(exc), wall_clock=time.perf_counter() - start)
        return record
    finally:
        provider.close()
    record.update(
        status="ok",
        best=best.raw_text,
        syntax_ok=best.ok,
        fitness=plugin.oracle_fitness(best, instance),
        metrics=plugin.metrics(best, instance),
        llm_calls=calls,
        calls_by_role=dict(sorted(by_role.items())),
        wall_clock=time.perf_counter() - start,
    )
    return record


def _instance_seed(root: int, instance_id: str) -> int:
    digest = hashlib.sha256(f"{root}:{instance_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _budget(cfg: RunConfig) -> dict[str, Any] | None:
    if cfg.method == "evo":
        e = cfg.evolution
        return {"L": compute_llm_budget(e), "L_rounded": budget_samples(e),
                "upper_with_dedup": compute_llm_budget(e) * (1 + e.max_dedup_attempts)}
    if cfg.method == "bon":
        return {"N": cfg.bon.samples,
                "upper_with_dedup": cfg.bon.samples * (1 + cfg.bon.max_dedup_attempts)}
    return {"upper_with_dedup": 1}


def build_manifest(cfg: RunConfig, dataset, results: list[dict[str, Any]],
                   wall_clock: float) -> dict[str, Any]:
    done = [r for r in results if r.get("status") == "ok"]
    return {
        "run_id": cfg.run_id,
        "method": cfg.method,
        "model": cfg.model,
        "problem": dataset.manifest.problem,
        "dataset": str(dataset.root),
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "budget": _budget(cfg),
        "instances": len(dataset.instances),
        "completed": len(done),
        "complete": len(done) == len(dataset.instances),
        "total_llm_calls": sum(r["llm_calls"] for r in done),
        "results": sorted(results, key=lambda r: r["instance_id"]),
        "wall_clock": wall_clock,
    }


def run_experiment(cfg: RunConfig, dataset_dir: str | Path, run_dir: str | Path,
                   progress: Callable[[dict[str, Any]], None] | None = None) -> dict[str, Any]:
    """Run ``cfg`` over the dataset; instances already finished under the same config are skipped."""
    dataset = load_dataset(dataset_dir)
    plugin = dataset.plugin
    run_dir = Path(run_dir)
    inst_dir = run_dir / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    write_atomic(run_dir / "config.json", dump_json(cfg.to_dict()))
    chash = cfg.config_hash()
    start = time.perf_counter()

    results: dict[str, dict[str, Any]] = {}
    todo = []
    for iid, inst in dataset.instances:
        path = inst_dir / f"{iid}.json"
        if path.exists():
            prev = json.loads(path.read_text())
            if prev.get("config_hash") == chash and prev.get("status") == "ok":
                results[iid] = prev
                continue
        todo.append((iid, inst))

    def work(item):
        iid, inst = item
        rec = solve_instance(cfg, plugin, inst, iid, run_dir)
        write_atomic(inst_dir / f"{iid}.json", dump_json(rec))
        if progress:
            progress(rec)
        return rec

    if cfg.workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            for rec in pool.map(work, todo):
                results[rec["instance_id"]] = rec
    else:
        for item in todo:
            rec = work(item)
            results[rec["instance_id"]] = rec

    manifest = build_manifest(cfg, dataset, list(results.values()), time.perf_counter() - start)
    write_atomic(run_dir / "manifest.json", dump_json(manifest))
    return manifest


def load_run(run_dir: str | Path) -> dict[str, Any]:
    return json.loads((Path(run_dir) / "manifest.json").read_text())
