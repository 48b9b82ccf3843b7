"""HTTP front end over the harness. Paths in requests are resolved against the artifact root."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException

from ..core import ConfigError, EvolutionConfig, budget_samples, compute_llm_budget
from ..harness import (
    ReportError,
    RunConfig,
    UnknownAblation,
    ablation_suite,
    aggregate_report,
    generate_dataset,
    load_dataset,
    load_run,
    run_experiment,
)
from ..harness.datasets import write_atomic
from ..llm.providers import ProviderAuthError
from . import schemas

log = logging.getLogger(__name__)

ROOT_ENV = "EVOGATE_ROOT"


def _summary(manifest: dict[str, Any], run_dir: Path) -> schemas.RunSummary:
    ok = [r for r in manifest["results"] if r.get("status") == "ok"]
    mean_ps = sum(r["metrics"]["PS"] for r in ok) / len(ok) if ok else None
    return schemas.RunSummary(
        run_id=manifest["run_id"], run_dir=str(run_dir), method=manifest["method"],
        model=manifest["model"], problem=manifest["problem"], instances=manifest["instances"],
        completed=manifest["completed"], complete=manifest["complete"],
        total_llm_calls=manifest["total_llm_calls"], mean_ps=mean_ps,
        wall_clock=manifest["wall_clock"])


def create_app(root: str | Path | None = None) -> FastAPI:
    root = Path(root or os.environ.get(ROOT_ENV) or ".").resolve()
    app = FastAPI(title="evogate", version="0.1.0")

    def at(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else root / path

    def bad_request(exc: Exception) -> HTTPException:
        return HTTPException(status_code=422, detail=str(exc))

    def execute(cfg: RunConfig, dataset: Path, run_dir: Path | None) -> tuple[dict[str, Any], Path]:
        problem = json.loads((dataset / "manifest.json").read_text())["problem"]
        run_dir = run_dir or root / "runs" / f"{cfg.run_id}-{problem}"
        try:
            return run_experiment(cfg, dataset, run_dir), run_dir
        except ProviderAuthError as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "root": str(root)}

    @app.post("/datasets", response_model=schemas.DatasetResponse)
    def make_dataset(req: schemas.DatasetRequest) -> schemas.DatasetResponse:
        out = at(req.out_dir) if req.out_dir else root / "datasets" / f"{req.problem}-n{req.count}-s{req.seed}"
        m = generate_dataset(req.problem, req.count, req.seed, out)
        return schemas.DatasetResponse(path=str(out), **m.to_dict())

    @app.get("/datasets/validate")
    def validate_dataset(path: str) -> dict[str, Any]:
        try:
            ds = load_dataset(at(path))
        except (OSError, ValueError, KeyError) as exc:
            raise bad_request(exc) from exc
        return {"path": str(ds.root), "problem": ds.manifest.problem, "count": ds.manifest.count}

    @app.post("/runs", response_model=schemas.RunSummary)
    def run(req: schemas.RunRequest) -> schemas.RunSummary:
        data = dict(req.config)
        if req.provider:
            data["provider"] = req.provider
        if req.workers:
            data["workers"] = req.workers
        try:
            cfg = RunConfig.from_dict(data)
            dataset = at(req.dataset)
            if not (dataset / "manifest.json").exists():
                raise ValueError(f"no dataset manifest under {dataset}")
            manifest, run_dir = execute(cfg, dataset, at(req.run_dir) if req.run_dir else None)
        except (ConfigError, ValueError, TypeError) as exc:
            raise bad_request(exc) from exc
        return _summary(manifest, run_dir)

    @app.post("/reports", response_model=schemas.ReportResponse)
    def report(req: schemas.ReportRequest) -> schemas.ReportResponse:
        try:
            manifests = [load_run(at(p)) for p in req.runs]
            text = aggregate_report(manifests)
        except (OSError, ReportError, KeyError) as exc:
            raise bad_request(exc) from exc
        path = None
        if req.out:
            write_atomic(at(req.out), text)
            path = str(at(req.out))
        return schemas.ReportResponse(markdown=text, runs=len(manifests), path=path)

    @app.get("/ablations/{name}", response_model=schemas.AblationPlan)
    def plan(name: str) -> schemas.AblationPlan:
        try:
            configs = ablation_suite(name)
        except UnknownAblation as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return schemas.AblationPlan(name=name, configs=[c.to_dict() for c in configs])

    @app.post("/ablations/{name}/run", response_model=schemas.AblationResponse)
    def ablate(name: str, req: schemas.AblationRequest) -> schemas.AblationResponse:
        try:
            configs = ablation_suite(name)
        except UnknownAblation as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        base = at(req.out_dir) if req.out_dir else root / "ablations" / name
        summaries, manifests = [], []
        try:
            for cfg in configs:
                cfg = dataclasses.replace(cfg, provider=req.provider, script=req.script,
                                          workers=req.workers)
                for ds in req.datasets:
                    dataset = at(ds)
                    problem = json.loads((dataset / "manifest.json").read_text())["problem"]
                    manifest, run_dir = execute(cfg, dataset, base / "runs" / f"{cfg.run_id}-{problem}")
                    manifests.append(manifest)
                    summaries.append(_summary(manifest, run_dir))
        except (ConfigError, ValueError, OSError) as exc:
            raise bad_request(exc) from exc
        text = aggregate_report(manifests)
        out = base / "reports" / f"{name}.md"
        write_atomic(out, text)
        return schemas.AblationResponse(
            name=name, runs=summaries,
            report=schemas.ReportResponse(markdown=text, runs=len(manifests), path=str(out)))

    @app.post("/budget", response_model=schemas.BudgetResponse)
    def budget(config: dict[str, Any]) -> schemas.BudgetResponse:
        try:
            cfg = EvolutionConfig.from_dict(config)
        except (ConfigError, TypeError) as exc:
            raise bad_request(exc) from exc
        L = compute_llm_budget(cfg)
        return schemas.BudgetResponse(budget=L, rounded=budget_samples(cfg),
                                      upper_with_dedup=L * (1 + cfg.max_dedup_attempts))

    return app
