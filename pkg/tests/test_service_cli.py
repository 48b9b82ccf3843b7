import json
import warnings

import pytest
from click.testing import CliRunner

from evogate.cli import main
from evogate.service import create_app

with warnings.catch_warnings():
    warnings.filterwarnings("ignore", message="Using `httpx` with")
    from fastapi.testclient import TestClient


@pytest.fixture
def api(tmp_path):
    return TestClient(create_app(tmp_path))


def cli(tmp_path, *args):
    return CliRunner().invoke(main, ["--root", str(tmp_path), *args], catch_exceptions=False)


# --- service ---------------------------------------------------------------

def test_health(api, tmp_path):
    assert api.get("/health").json() == {"status": "ok", "root": str(tmp_path.resolve())}


def test_dataset_endpoint(api, tmp_path):
    r = api.post("/datasets", json={"problem": "tsp", "count": 2, "seed": 1})
    assert r.status_code == 200
    body = r.json()
    assert body["path"] == str(tmp_path.resolve() / "datasets" / "tsp-n2-s1")
    assert body["files"] == ["instance_000.json", "instance_001.json"]
    v = api.get("/datasets/validate", params={"path": "datasets/tsp-n2-s1"})
    assert v.json() == {"path": body["path"], "problem": "tsp", "count": 2}


@pytest.mark.parametrize("payload", [
    {"problem": "knapsack", "count": 1, "seed": 0},
    {"problem": "sk", "count": -1, "seed": 0},
    {"problem": "sk", "count": 1, "seed": 0, "extra": True},
])
def test_dataset_validation_errors(api, payload):
    assert api.post("/datasets", json=payload).status_code == 422


def test_validate_missing_dataset(api):
    assert api.get("/datasets/validate", params={"path": "nowhere"}).status_code == 422


def test_run_and_report_endpoints(api):
    api.post("/datasets", json={"problem": "gc", "count": 2, "seed": 0})
    r = api.post("/runs", json={"config": {"method": "dp"}, "dataset": "datasets/gc-n2-s0"})
    assert r.status_code == 200
    s = r.json()
    assert s["complete"] and s["total_llm_calls"] == 2 and s["problem"] == "gc"
    rep = api.post("/reports", json={"runs": [s["run_dir"]], "out": "reports/x.md"})
    assert rep.status_code == 200
    assert rep.json()["markdown"].startswith("# Results")
    assert rep.json()["path"].endswith("reports/x.md")


def test_run_rejects_bad_config(api):
    api.post("/datasets", json={"problem": "gc", "count": 1, "seed": 0})
    r = api.post("/runs", json={"config": {"method": "dp", "temperature": 2}, "dataset": "datasets/gc-n1-s0"})
    assert r.status_code == 422
    r = api.post("/runs", json={"config": {"method": "dp"}, "dataset": "missing"})
    assert r.status_code == 422


def test_live_run_without_key_is_401(api, monkeypatch):
    monkeypatch.delenv("EVOGATE_API_KEY", raising=False)
    api.post("/datasets", json={"problem": "gc", "count": 1, "seed": 0})
    r = api.post("/runs", json={"config": {"method": "dp"}, "dataset": "datasets/gc-n1-s0",
                                "provider": "live"})
    assert r.status_code == 401


def test_report_errors(api):
    assert api.post("/reports", json={"runs": []}).status_code == 422
    assert api.post("/reports", json={"runs": ["nope"]}).status_code == 422


def test_ablation_plan(api):
    plan = api.get("/ablations/dedup").json()
    assert [c["evolution"]["max_dedup_attempts"] for c in plan["configs"]] == [0, 3, 6]
    assert api.get("/ablations/bogus").status_code == 404
    assert api.post("/ablations/bogus/run", json={"datasets": ["x"]}).status_code == 404


def test_budget_endpoint(api):
    assert api.post("/budget", json={}).json() == {"budget": 345.0, "rounded": 345,
                                                   "upper_with_dedup": 1380.0}
    assert api.post("/budget", json={"population_size": 0}).status_code == 422


# --- CLI -------------------------------------------------------------------

def test_cli_gen_run_report(tmp_path):
    r = cli(tmp_path, "gen", "--problem", "tsp", "--count", "2", "--seed", "3")
    assert r.exit_code == 0 and "wrote 2 tsp instances" in r.output
    ds = tmp_path / "datasets" / "tsp-n2-s3"
    cfg = tmp_path / "evo.json"
    cfg.write_text(json.dumps({"evolution": {"population_size": 4, "generations": 2}}))
    runs = []
    for method in ("dp", "bon", "evo"):
        args = ["run", "--method", method, "--dataset", str(ds), "--provider", "scripted",
                "--out", str(tmp_path / "runs" / method)]
        if method == "evo":
            args += ["--config", str(cfg)]
        r = cli(tmp_path, *args)
        assert r.exit_code == 0, r.output
        assert "2/2 instances" in r.output
        runs.append(str(tmp_path / "runs" / method))
    r = cli(tmp_path, "report", "--runs", runs[0], runs[1], runs[2], "--out", str(tmp_path / "r.md"))
    assert r.exit_code == 0
    assert "| Model | Method | TSP CR | TSP PS | TSP EDM | TSP MC |" in r.output
    assert (tmp_path / "r.md").read_text() == r.output


def test_cli_run_dataset_missing(tmp_path):
    r = cli(tmp_path, "run", "--method", "dp", "--dataset", str(tmp_path / "none"))
    assert r.exit_code == 1 and "422" in r.output


def test_cli_incomplete_run_exits_nonzero(tmp_path):
    cli(tmp_path, "gen", "--problem", "gc", "--count", "1", "--seed", "0")
    script = tmp_path / "s.json"
    script.write_text("[]")
    r = cli(tmp_path, "run", "--method", "dp", "--dataset", str(tmp_path / "datasets" / "gc-n1-s0"),
            "--script", str(script))
    assert r.exit_code == 1 and "0/1 instances" in r.output


@pytest.mark.parametrize("name", ["scale", "fe", "ed", "ep", "dd", "ops"])
def test_cli_ablate_dry_run(tmp_path, name):
    r = cli(tmp_path, "ablate", "--name", name, "--dry-run")
    assert r.exit_code == 0
    configs = json.loads(r.output)
    assert configs and all(c["tags"]["ablation"] == name for c in configs)
    assert not (tmp_path / "ablations").exists()


def test_cli_ablate_unknown(tmp_path):
    r = cli(tmp_path, "ablate", "--name", "nope", "--dry-run")
    assert r.exit_code == 1 and "404" in r.output


def test_cli_ablate_runs_small_suite(tmp_path):
    r = cli(tmp_path, "ablate", "--name", "ep", "--instances", "1")
    assert r.exit_code == 0, r.output
    assert "## Ablation: ep" in r.output
    assert (tmp_path / "ablations" / "ep" / "reports" / "ep.md").exists()
    assert len(list((tmp_path / "ablations" / "ep" / "runs").iterdir())) == 9
