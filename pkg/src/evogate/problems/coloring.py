"""Graph coloring: Erdős–Rényi instances, metrics, verifier errors and repair operators."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from ..core import Candidate, ColoringErrors, SyntaxFailure

N_VERTICES = 9
COLORS = 3
EDGE_PROB = 0.5


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GraphColoringInstance:
    n_vertices: int
    color_count: int
    edges: tuple[tuple[int, int], ...]  # u < v, sorted

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError("self-loop in edge list")
            if not (0 <= u < v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) not normalised or out of range")

    @property
    def adjacency_matrix(self) -> str:
        adj = [["n"] * self.n_vertices for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u][v] = adj[v][u] = "y"
        return "\n".join(" ".join(row) for row in adj)


def normalise_edges(edges) -> tuple[tuple[int, int], ...]:
    return tuple(sorted({(min(u, v), max(u, v)) for u, v in edges}))


@lru_cache(maxsize=8)
def _all_assignments(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int8)


def is_colorable(instance: GraphColoringInstance, k: int | None = None) -> bool:
    """Exhaustive check over all k^n assignments."""
    k = instance.color_count if k is None else k
    if not instance.edges:
        return True
    table = _all_assignments(instance.n_vertices, k)
    e = np.array(instance.edges)
    proper = (table[:, e[:, 0]] != table[:, e[:, 1]]).all(axis=1)
    return bool(proper.any())


def generate_gc(rng: random.Random, n_vertices: int = N_VERTICES, color_count: int = COLORS,
                p: float = EDGE_PROB, max_attempts: int = 1000) -> GraphColoringInstance:
    for _ in range(max_attempts):
        edges = tuple((u, v) for u, v in itertools.combinations(range(n_vertices), 2)
                      if rng.random() < p)
        inst = GraphColoringInstance(n_vertices, color_count, edges)
        if is_colorable(inst):
            return inst
    raise GenerationError(f"no {color_count}-colorable graph after {max_attempts} draws")


# ---------------------------------------------------------------------------
# Metrics

def conflict_edges(f: Sequence[int], instance: GraphColoringInstance) -> list[tuple[int, int]]:
    return [(u, v) for u, v in instance.edges if f[u] == f[v]]


def conflict_vertices(f: Sequence[int], instance: GraphColoringInstance) -> set[int]:
    return {x for e in conflict_edges(f, instance) for x in e}


def gc_conflict_ratio(f: Sequence[int], instance: GraphColoringInstance) -> float:
    if not instance.edges:
        return 0.0
    return len(conflict_edges(f, instance)) / len(instance.edges)


def gc_score(f: Sequence[int], instance: GraphColoringInstance) -> float:
    return (1 - gc_conflict_ratio(f, instance)) * 100


def gc_excess_color_usage(f: Sequence[int], instance: GraphColoringInstance) -> int:
    return len(set(f)) - instance.color_count


def gc_penalized_score(f: Sequence[int], instance: GraphColoringInstance) -> float:
    used = len(set(f))
    n, k = instance.n_vertices, instance.color_count
    if used >= n:
        return 0.0
    score = gc_score(f, instance)
    if used <= k:
        return score
    return score * (1 - (used - k) / (n - k))


def gc_correct(f: Sequence[int], instance: GraphColoringInstance) -> bool:
    return all(0 <= c < instance.color_count for c in f) and not conflict_edges(f, instance)


def parse_coloring(text: str, n_vertices: int) -> tuple[int, ...]:
    tokens = [t.strip() for t in text.strip().split(",")]
    if len(tokens) != n_vertices:
        raise ValueError(f"expected {n_vertices} colors, got {len(tokens)}")
    if not all(t.isdigit() for t in tokens):
        raise ValueError("colors must be non-negative integers")
    return tuple(int(t) for t in tokens)


def format_coloring(f: Sequence[int]) -> str:
    return ",".join(str(c) for c in f)


# ---------------------------------------------------------------------------
# Errors and operators

def gc_detect_errors(candidate: Candidate, instance: GraphColoringInstance, limit: int) -> ColoringErrors:
    if not candidate.ok:
        return ColoringErrors(syntax_error=True)
    f = candidate.parsed
    return ColoringErrors(conflict_edges=tuple(conflict_edges(f, instance)[:limit]),
                          excess_colors=gc_excess_color_usage(f, instance))


def _coloring(f: Sequence[int]) -> Candidate:
    f = tuple(f)
    return Candidate(format_coloring(f), f)


def gc_eco(c1: Candidate, c2: Candidate, instance: GraphColoringInstance, rng: random.Random) -> Candidate:
    if not c1.ok:
        return c2
    if not c2.ok:
        return c1
    a, b = c1.parsed, c2.parsed
    cv1, cv2 = conflict_vertices(a, instance), conflict_vertices(b, instance)
    child = []
    for i in range(instance.n_vertices):
        if i in cv1 and i not in cv2:
            child.append(b[i])
        elif i in cv2 and i not in cv1:
            child.append(a[i])
        else:
            child.append(a[i] if rng.random() < 0.5 else b[i])
    return _coloring(child)


def resolve_conflict(f: Sequence[int], instance: GraphColoringInstance, rng: random.Random) -> list[int]:
    """Recolor one randomly drawn vertex if it sits on a conflicted edge."""
    f = list(f)
    i = rng.randrange(len(f))
    if i in conflict_vertices(f, instance):
        f[i] = rng.choice([y for y in range(instance.color_count) if y != f[i]])
    return f


def correct_excess_colors(f: Sequence[int], instance: GraphColoringInstance, rng: random.Random) -> list[int]:
    k = instance.color_count
    return [c if c < k else rng.randrange(k) for c in f]


def gc_emo(c: Candidate, instance: GraphColoringInstance, rng: random.Random) -> Candidate:
    if not c.ok:
        return c
    return _coloring(correct_excess_colors(resolve_conflict(c.parsed, instance, rng), instance, rng))


# ---------------------------------------------------------------------------
# Plugin

class GraphColoringProblem:
    kind = "gc"
    name = "graph coloring"

    def parse(self, text: str, instance: GraphColoringInstance) -> Candidate:
        try:
            return Candidate(text, parse_coloring(text, instance.n_vertices))
        except ValueError as exc:
            return Candidate(text, SyntaxFailure(str(exc)))

    def format_solution(self, parsed) -> str:
        return format_coloring(parsed)

    def prompt_bindings(self, instance: GraphColoringInstance) -> dict[str, Any]:
        adj = instance.adjacency_matrix
        return {"adjacency_matrix": adj, "adjacency_matrix_str": adj,
                "n_vertices": instance.n_vertices, "color_count": instance.color_count,
                "n_edges": len(instance.edges)}

    def oracle_fitness(self, candidate: Candidate, instance: GraphColoringInstance) -> float:
        return gc_penalized_score(candidate.parsed, instance) if candidate.ok else 0.0

    def detect_errors(self, candidate, instance, limit) -> ColoringErrors:
        return gc_detect_errors(candidate, instance, limit)

    def empty_errors(self) -> ColoringErrors:
        return ColoringErrors()

    def external_crossover(self, c1, c2, instance, rng) -> Candidate:
        return gc_eco(c1, c2, instance, rng)

    def external_mutation(self, c, instance, rng) -> Candidate:
        return gc_emo(c, instance, rng)

    def is_correct(self, candidate, instance) -> bool:
        return candidate.ok and gc_correct(candidate.parsed, instance)

    def metrics(self, candidate: Candidate, instance: GraphColoringInstance) -> dict[str, float | None]:
        if not candidate.ok:
            return {"CR": 0.0, "SC": 0.0, "PS": 0.0, "ECU": None, "CF": None}
        f = candidate.parsed
        return {"CR": float(gc_correct(f, instance)), "SC": gc_score(f, instance),
                "PS": gc_penalized_score(f, instance),
                "ECU": float(gc_excess_color_usage(f, instance)),
                "CF": gc_conflict_ratio(f, instance)}

    def generate_instance(self, rng: random.Random) -> GraphColoringInstance:
        return generate_gc(rng)

    def instance_to_dict(self, instance: GraphColoringInstance) -> dict[str, Any]:
        return {"n_vertices": instance.n_vertices, "color_count": instance.color_count,
                "edges": [list(e) for e in instance.edges],
                "adjacency_matrix": instance.adjacency_matrix}

    def instance_from_dict(self, data: dict[str, Any]) -> GraphColoringInstance:
        inst = GraphColoringInstance(data["n_vertices"], data["color_count"],
                                     normalise_edges(data["edges"]))
        if "adjacency_matrix" in data and data["adjacency_matrix"] != inst.adjacency_matrix:
            raise ValueError("adjacency_matrix does not match edges")
        return inst

    def validate_instance(self, instance: GraphColoringInstance) -> None:
        if not is_colorable(instance):
            raise ValueError(f"graph is not {instance.color_count}-colorable")

    def identity(self, instance: GraphColoringInstance) -> Any:
        return instance.edges

    def synthetic_answer(self, instance: GraphColoringInstance, rng: random.Random) -> str:
        palette = instance.color_count + (1 if rng.random() < 0.2 else 0)
        f = [rng.randrange(palette) for _ in range(instance.n_vertices)]
        return f"My coloring:\n```\n{format_coloring(f)}\n```"
