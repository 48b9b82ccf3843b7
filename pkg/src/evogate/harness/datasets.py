"""Seeded benchmark datasets stored as flat JSON files."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..core import substream
from ..problems import get_plugin

MANIFEST = "manifest.json"
FILTERS = {
    "sk": ["40 blanks", "unique completion"],
    "gc": ["3-colorable (exhaustive)"],
    "tsp": ["optimum by exhaustive enumeration"],
}


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


@dataclass
class DatasetManifest:
    problem: str
    count: int
    seed: int
    files: list[str] = field(default_factory=list)
    filters: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"problem": self.problem, "count": self.count, "seed": self.seed,
                "files": self.files, "filters": self.filters}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DatasetManifest":
        return cls(data["problem"], data["count"], data["seed"], list(data["files"]),
                   list(data.get("filters", [])))


@dataclass
class Dataset:
    root: Path
    manifest: DatasetManifest
    instances: list[tuple[str, Any]]  # (instance id, instance)

    @property
    def plugin(self):
        return get_plugin(self.manifest.problem)


def generate_dataset(problem: str, count: int, seed: int, out_dir: str | Path,
                     max_draws_per_instance: int = 100) -> DatasetManifest:
    """Draw ``count`` distinct instances and write them plus a manifest under ``out_dir``."""
    plugin = get_plugin(problem)
    if count < 0:
        raise ValueError("count must be non-negative")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = substream(seed, f"dataset:{problem}")
    seen = set()
    manifest = DatasetManifest(problem, count, seed, filters=list(FILTERS[problem]))
    draws = 0
    while len(manifest.files) < count:
        draws += 1
        if draws > count * max_draws_per_instance:
            raise RuntimeError(f"could not draw {count} distinct {problem} instances")
        inst = plugin.generate_instance(rng)
        ident = plugin.identity(inst)
        if ident in seen:
            continue
        seen.add(ident)
        name = f"instance_{len(manifest.files):03d}.json"
        body = {"id": f"{problem}-{len(manifest.files):03d}", "problem": problem,
                **plugin.instance_to_dict(inst)}
        write_atomic(out / name, dump_json(body))
        manifest.files.append(name)
    write_atomic(out / MANIFEST, dump_json(manifest.to_dict()))
    return manifest


def load_dataset(path: str | Path, validate: bool = True) -> Dataset:
    root = Path(path)
    manifest = DatasetManifest.from_dict(json.loads((root / MANIFEST).read_text()))
    plugin = get_plugin(manifest.problem)
    if len(manifest.files) != manifest.count:
        raise ValueError(f"manifest lists {len(manifest.files)} files but count is {manifest.count}")
    instances = []
    for name in manifest.files:
        data = json.loads((root / name).read_text())
        if data.get("problem") != manifest.problem:
            raise ValueError(f"{name}: problem kind does not match manifest")
        inst = plugin.instance_from_dict(data)
        if validate:
            try:
                plugin.validate_instance(inst)
            except ValueError as exc:
                raise ValueError(f"{name}: {exc}") from exc
        instances.append((data["id"], inst))
    return Dataset(root, manifest, instances)
