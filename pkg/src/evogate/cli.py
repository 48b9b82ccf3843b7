"""Command-line client for the evogate service.

By default the service runs in-process; pass ``--server URL`` (or set
EVOGATE_SERVER) to talk to a running instance instead.
"""

from __future__ import annotations

import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Any

import click
import httpx

SERVER_ENV = "EVOGATE_SERVER"


class Client:
    def __init__(self, root: str | None, server: str | None):
        self.remote = bool(server)
        if server:
            self.http = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                # starlette nags about its httpx backend; irrelevant in-process
                warnings.filterwarnings("ignore", message="Using `httpx` with")
                from fastapi.testclient import TestClient

            from .service import create_app

            self.http = TestClient(create_app(root))

    def path(self, p: str | None) -> str | None:
        # local paths are relative to the caller, remote ones to the server root
        if p is None or self.remote:
            return p
        return str(Path(p).resolve())

    def call(self, method: str, url: str, **kw: Any) -> Any:
        resp = self.http.request(method, url, **kw)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise click.ClickException(f"{resp.status_code}: {detail}")
        return resp.json()


@click.group()
@click.option("--root", envvar="EVOGATE_ROOT", default=".", show_default=True,
              type=click.Path(file_okay=False), help="Artifact root (datasets/, runs/, reports/).")
@click.option("--server", envvar=SERVER_ENV, default=None, help="URL of a running evogate service.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx: click.Context, root: str, server: str | None, verbose: bool) -> None:
    """LLM-driven genetic search on Sudoku, graph coloring and TSP."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = Client(root, server)


@main.command()
@click.option("--problem", type=click.Choice(["sk", "gc", "tsp"]), required=True)
@click.option("--count", type=click.IntRange(min=0), required=True)
@click.option("--seed", type=click.IntRange(min=0), required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Output directory (default: <root>/datasets/<problem>-n<count>-s<seed>).")
@click.pass_obj
def gen(client: Client, problem: str, count: int, seed: int, out: str | None) -> None:
    """Generate a dataset of distinct, validated instances."""
    res = client.call("POST", "/datasets", json={"problem": problem, "count": count,
                                                 "seed": seed, "out_dir": client.path(out)})
    click.echo(f"wrote {res['count']} {problem} instances to {res['path']}")


@main.command()
@click.option("--method", type=click.Choice(["dp", "bon", "evo"]), required=True)
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON run config; the method flag overrides its 'method'.")
@click.option("--dataset", type=click.Path(file_okay=False), required=True)
@click.option("--provider", type=click.Choice(["live", "scripted", "replay"]), default="scripted",
              show_default=True)
@click.option("--script", default=None, help="Scripted responses (JSON) or replay fixture (JSONL or dir).")
@click.option("--model", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory.")
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.pass_obj
def run(client: Client, method: str, config_file: str | None, dataset: str, provider: str,
        script: str | None, model: str | None, out: str | None, workers: int | None) -> None:
    """Run one method over a dataset (resumes finished instances)."""
    config: dict[str, Any] = json.loads(Path(config_file).read_text()) if config_file else {}
    config["method"] = method
    if model:
        config["model"] = model
    if script:
        config["script"] = client.path(script)
    res = client.call("POST", "/runs", json={"config": config, "dataset": client.path(dataset),
                                             "run_dir": client.path(out), "provider": provider,
                                             "workers": workers})
    ps = "-" if res["mean_ps"] is None else f"{res['mean_ps']:.2f}"
    click.echo(f"{res['run_id']}: {res['completed']}/{res['instances']} instances, "
               f"{res['total_llm_calls']} LLM calls, mean PS {ps} -> {res['run_dir']}")
    if not res["complete"]:
        sys.exit(1)


@main.command()
@click.option("--runs", multiple=True, required=True, type=click.Path(file_okay=False),
              help="Run directory; repeat for several.")
@click.argument("more_runs", nargs=-1, type=click.Path(file_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write markdown here too.")
@click.pass_obj
def report(client: Client, runs: tuple[str, ...], more_runs: tuple[str, ...], out: str | None) -> None:
    """Aggregate run manifests into markdown tables."""
    paths = [client.path(p) for p in (*runs, *more_runs)]
    res = client.call("POST", "/reports", json={"runs": paths, "out": client.path(out)})
    click.echo(res["markdown"], nl=False)


@main.command()
@click.option("--name", required=True,
              help="scale, split, fe, ed, ep, dd, ops or main.")
@click.option("--dry-run", is_flag=True, help="Print the expanded configs and stop.")
@click.option("--dataset", "datasets", multiple=True, type=click.Path(file_okay=False),
              help="Dataset directory; repeat per problem. Default: generate 10 per problem.")
@click.option("--instances", type=click.IntRange(min=1), default=10, show_default=True,
              help="Instances per generated dataset when --dataset is not given.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--provider", type=click.Choice(["live", "scripted", "replay"]), default="scripted",
              show_default=True)
@click.option("--script", default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.pass_obj
def ablate(client: Client, name: str, dry_run: bool, datasets: tuple[str, ...], instances: int,
           seed: int, provider: str, script: str | None, out: str | None, workers: int) -> None:
    """Expand and run a named ablation, then write its report."""
    plan = client.call("GET", f"/ablations/{name}")
    if dry_run:
        click.echo(json.dumps(plan["configs"], indent=2))
        return
    paths = [client.path(d) for d in datasets]
    if not paths:
        for problem in ("sk", "gc", "tsp"):
            res = client.call("POST", "/datasets", json={"problem": problem, "count": instances,
                                                         "seed": seed})
            paths.append(res["path"])
    res = client.call("POST", f"/ablations/{name}/run",
                      json={"datasets": paths, "provider": provider, "script": client.path(script),
                            "out_dir": client.path(out), "workers": workers})
    for r in res["runs"]:
        ps = "-" if r["mean_ps"] is None else f"{r['mean_ps']:.2f}"
        click.echo(f"{r['run_id']} [{r['problem']}]: {r['completed']}/{r['instances']}, "
                   f"{r['total_llm_calls']} calls, mean PS {ps}", err=True)
    click.echo(res["report"]["markdown"], nl=False)
    click.echo(f"report written to {res['report']['path']}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_context
def serve(ctx: click.Context, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(ctx.parent.params["root"]), host=host, port=port)


if __name__ == "__main__":
    main()
