"""Euclidean TSP with an exhaustively enumerated reference optimum."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from ..core import Candidate, RouteErrors, SyntaxFailure

N_CITIES = 10
MAX_EDM = 3.0
TOLERANCE = 1e-9


@dataclass(frozen=True)
class TspInstance:
    coords: tuple[tuple[float, float], ...]
    optimal_route: tuple[int, ...]
    optimal_distance: float

    @property
    def n_cities(self) -> int:
        return len(self.coords)

    @property
    def distances(self) -> tuple[tuple[float, ...], ...]:
        return distance_matrix(self.coords)

    @property
    def distance_text(self) -> str:
        return "\n".join(" ".join(f"{d:.2f}" for d in row) for row in self.distances)


@lru_cache(maxsize=64)
def distance_matrix(coords: tuple[tuple[float, float], ...]) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(math.dist(a, b) for b in coords) for a in coords)


def route_distance(route: Sequence[int], instance: TspInstance) -> float:
    d = instance.distances
    return sum(d[route[i]][route[i + 1]] for i in range(len(route) - 1))


@lru_cache(maxsize=4)
def _tails(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(1, n))), dtype=np.int8)


def solve_exhaustive(coords: Sequence[tuple[float, float]]) -> tuple[tuple[int, ...], float]:
    """Shortest Hamiltonian cycle from city 0 by scoring all (n-1)! orderings."""
    coords = tuple(tuple(c) for c in coords)
    n = len(coords)
    if n == 1:
        return (0, 0), 0.0
    d = np.array(distance_matrix(coords))
    tails = _tails(n).astype(np.intp)
    cost = d[0, tails[:, 0]] + d[tails[:, -1], 0]
    for k in range(n - 2):
        cost += d[tails[:, k], tails[:, k + 1]]
    best = int(np.argmin(cost))
    route = (0, *map(int, tails[best]), 0)
    legs = distance_matrix(coords)
    return route, sum(legs[route[i]][route[i + 1]] for i in range(n))


def generate_tsp(rng: random.Random, n_cities: int = N_CITIES) -> TspInstance:
    coords = tuple((rng.uniform(0, 100), rng.uniform(0, 100)) for _ in range(n_cities))
    route, dist = solve_exhaustive(coords)
    return TspInstance(coords, route, dist)


# ---------------------------------------------------------------------------
# Metrics

def tsp_edm(route: Sequence[int], instance: TspInstance) -> float:
    best = instance.optimal_distance
    return min(MAX_EDM, (route_distance(route, instance) - best) / best)


def tsp_missing_cities(route: Sequence[int], instance: TspInstance) -> list[int]:
    present = set(route)
    return [v for v in range(instance.n_cities) if v not in present]


def tsp_missing_cities_count(route: Sequence[int], instance: TspInstance) -> int:
    return instance.n_cities - len(set(route))


def tsp_penalized_score(route: Sequence[int], instance: TspInstance) -> float:
    dist = 1 - tsp_edm(route, instance) / MAX_EDM
    miss = 1 - tsp_missing_cities_count(route, instance) / instance.n_cities
    return 100 * min(dist, miss)


def tsp_correct(route: Sequence[int], instance: TspInstance) -> bool:
    n = instance.n_cities
    if len(route) != n + 1 or route[0] != 0 or route[-1] != 0:
        return False
    if sorted(route[:-1]) != list(range(n)):
        return False
    return abs(route_distance(route, instance) - instance.optimal_distance) <= TOLERANCE


def parse_route(text: str, n_cities: int) -> tuple[int, ...]:
    tokens = [t.strip() for t in text.strip().split(",")]
    if not all(t.isdigit() for t in tokens):
        raise ValueError("route must be comma-separated city indices")
    route = tuple(int(t) for t in tokens)
    if len(route) < 2:
        raise ValueError("route must start and end at city 0")
    if route[0] != 0 or route[-1] != 0:
        raise ValueError("route must start and end at city 0")
    if any(c >= n_cities for c in route):
        raise ValueError("city index out of range")
    return route


def format_route(route: Sequence[int]) -> str:
    return ",".join(str(c) for c in route)


def _route(route: Sequence[int], n_cities: int) -> Candidate:
    text = format_route(route)
    try:
        return Candidate(text, parse_route(text, n_cities))
    except ValueError as exc:
        return Candidate(text, SyntaxFailure(str(exc)))


# ---------------------------------------------------------------------------
# Errors and operators

def tsp_detect_errors(candidate: Candidate, instance: TspInstance, limit: int) -> RouteErrors:
    if not candidate.ok:
        return RouteErrors(syntax_error=True)
    r = candidate.parsed
    return RouteErrors(missing_cities=tuple(tsp_missing_cities(r, instance)[:limit]),
                       excess_distance=route_distance(r, instance) - instance.optimal_distance)


def _perfect(c: Candidate, instance: TspInstance) -> bool:
    return tsp_detect_errors(c, instance, instance.n_cities).clean


def tsp_eco(c1: Candidate, c2: Candidate, instance: TspInstance, rng: random.Random) -> Candidate:
    if not c1.ok:
        return c2
    if not c2.ok:
        return c1
    if _perfect(c1, instance):
        return c1
    if _perfect(c2, instance):
        return c2
    k = rng.randint(1, instance.n_cities - 1)
    return _route(c1.parsed[:k] + c2.parsed[k:], instance.n_cities)


def surplus_positions(route: Sequence[int]) -> list[int]:
    """Interior positions holding a city already seen; the 0 at both ends is allowed."""
    seen = {route[0]}
    out = []
    for pos in range(1, len(route) - 1):
        if route[pos] in seen:
            out.append(pos)
        seen.add(route[pos])
    return out


def tsp_emo(c: Candidate, instance: TspInstance) -> Candidate:
    if not c.ok:
        return c
    missing = tsp_missing_cities(c.parsed, instance)
    if not missing:
        return c
    route = list(c.parsed)
    for pos, city in zip(surplus_positions(route), missing):
        route[pos] = city
    return _route(route, instance.n_cities)


# ---------------------------------------------------------------------------
# Plugin

class TspProblem:
    kind = "tsp"
    name = "traveling salesman"

    def parse(self, text: str, instance: TspInstance) -> Candidate:
        try:
            return Candidate(text, parse_route(text, instance.n_cities))
        except ValueError as exc:
            return Candidate(text, SyntaxFailure(str(exc)))

    def format_solution(self, parsed) -> str:
        return format_route(parsed)

    def prompt_bindings(self, instance: TspInstance) -> dict[str, Any]:
        return {"distance_matrix": instance.distance_text, "n_cities": instance.n_cities,
                "DEFAULT_EDM": int(MAX_EDM)}

    def oracle_fitness(self, candidate: Candidate, instance: TspInstance) -> float:
        return tsp_penalized_score(candidate.parsed, instance) if candidate.ok else 0.0

    def detect_errors(self, candidate, instance, limit) -> RouteErrors:
        return tsp_detect_errors(candidate, instance, limit)

    def empty_errors(self) -> RouteErrors:
        return RouteErrors()

    def external_crossover(self, c1, c2, instance, rng) -> Candidate:
        return tsp_eco(c1, c2, instance, rng)

    def external_mutation(self, c, instance, rng) -> Candidate:
        return tsp_emo(c, instance)

    def is_correct(self, candidate, instance) -> bool:
        return candidate.ok and tsp_correct(candidate.parsed, instance)

    def metrics(self, candidate: Candidate, instance: TspInstance) -> dict[str, float | None]:
        if not candidate.ok:
            return {"CR": 0.0, "PS": 0.0, "EDM": None, "MC": None}
        r = candidate.parsed
        return {"CR": float(tsp_correct(r, instance)), "PS": tsp_penalized_score(r, instance),
                "EDM": tsp_edm(r, instance), "MC": float(tsp_missing_cities_count(r, instance))}

    def generate_instance(self, rng: random.Random) -> TspInstance:
        return generate_tsp(rng)

    def instance_to_dict(self, instance: TspInstance) -> dict[str, Any]:
        return {"n_cities": instance.n_cities, "coords": [list(c) for c in instance.coords],
                "distance_matrix": [list(r) for r in instance.distances],
                "optimal_route": list(instance.optimal_route),
                "optimal_distance": instance.optimal_distance}

    def instance_from_dict(self, data: dict[str, Any]) -> TspInstance:
        coords = tuple(tuple(c) for c in data["coords"])
        if len(coords) != data["n_cities"]:
            raise ValueError("n_cities does not match coords")
        return TspInstance(coords, tuple(data["optimal_route"]), float(data["optimal_distance"]))

    def validate_instance(self, instance: TspInstance) -> None:
        route, dist = solve_exhaustive(instance.coords)
        if abs(dist - instance.optimal_distance) > TOLERANCE:
            raise ValueError(f"stored optimum {instance.optimal_distance} != enumerated {dist}")
        if not tsp_correct(instance.optimal_route, instance):
            raise ValueError("stored optimal route is not an optimal Hamiltonian cycle")

    def identity(self, instance: TspInstance) -> Any:
        return instance.coords

    def synthetic_answer(self, instance: TspInstance, rng: random.Random) -> str:
        n = instance.n_cities
        roll = rng.random()
        if roll < 0.1:
            route = list(instance.optimal_route)
        else:
            tail = list(range(1, n))
            rng.shuffle(tail)
            if roll < 0.3:
                tail[rng.randrange(len(tail))] = rng.randrange(n)
            route = [0, *tail, 0]
        return f"Shortest tour I found:\n```\n{format_route(route)}\n```"
