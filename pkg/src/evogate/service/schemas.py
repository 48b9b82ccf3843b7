from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

Problem = Literal["sk", "gc", "tsp"]
Method = Literal["dp", "bon", "evo"]
ProviderKind = Literal["live", "scripted", "replay"]


class DatasetRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: Problem
    count: int = Field(ge=0)
    seed: int = Field(ge=0)
    out_dir: str | None = None


class DatasetResponse(BaseModel):
    path: str
    problem: Problem
    count: int
    seed: int
    files: list[str]
    filters: list[str]


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict[str, Any]
    dataset: str
    run_dir: str | None = None
    provider: ProviderKind | None = None
    workers: int | None = Field(default=None, ge=1)


class RunSummary(BaseModel):
    run_id: str
    run_dir: str
    method: Method
    model: str
    problem: Problem
    instances: int
    completed: int
    complete: bool
    total_llm_calls: int
    mean_ps: float | None
    wall_clock: float


class ReportRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    runs: list[str] = Field(min_length=1)
    out: str | None = None


class ReportResponse(BaseModel):
    markdown: str
    runs: int
    path: str | None = None


class AblationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    datasets: list[str] = Field(min_length=1)
    provider: ProviderKind = "scripted"
    script: str | None = None
    out_dir: str | None = None
    workers: int = Field(default=1, ge=1)


class AblationPlan(BaseModel):
    name: str
    configs: list[dict[str, Any]]


class AblationResponse(BaseModel):
    name: str
    runs: list[RunSummary]
    report: ReportResponse


class BudgetResponse(BaseModel):
    budget: float
    rounded: int
    upper_with_dedup: float
