import random
import sys

import pytest

from evogate.core import Candidate, PopulationMember
from evogate.problems import get_plugin
from evogate.problems.coloring import GraphColoringInstance
from evogate.problems.tsp import TspInstance, solve_exhaustive


@pytest.fixture(scope="session")
def sk_puzzle():
    return get_plugin("sk").generate_instance(random.Random(2024))


@pytest.fixture(scope="session")
def gc_instance():
    return get_plugin("gc").generate_instance(random.Random(7))


@pytest.fixture(scope="session")
def tsp_instance():
    return get_plugin("tsp").generate_instance(random.Random(5))


@pytest.fixture
def small_gc():
    # path 0-1-2 plus a triangle 2-3-4
    return GraphColoringInstance(5, 3, ((0, 1), (1, 2), (2, 3), (2, 4), (3, 4)))


@pytest.fixture
def square_tsp():
    coords = ((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0))
    route, dist = solve_exhaustive(coords)
    return TspInstance(coords, route, dist)


def member(text: str, fitness: float, errors=None) -> PopulationMember:
    from evogate.core import RouteErrors

    return PopulationMember(Candidate(text, (text,)), fitness, errors or RouteErrors())


def fenced(body: str) -> str:
    return f"Here you go:\n```\n{body}\n```"


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
