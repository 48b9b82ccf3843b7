"""Pulling answers, scores and error reports out of model responses."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..core import ColoringErrors, ErrorReport, RouteErrors, SudokuErrors

log = logging.getLogger(__name__)

_FENCE = re.compile(r"```([^\n`]*)\n(.*?)```", re.DOTALL)
_NUMBER = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")


class ExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class CodeBlock:
    lang: str
    body: str


def code_blocks(text: str) -> list[CodeBlock]:
    blocks = []
    for m in _FENCE.finditer(text):
        body = m.group(2)
        if body.endswith("\n"):
            body = body[:-1]
        blocks.append(CodeBlock(m.group(1).strip(), body))
    return blocks


def extract_solution_block(text: str) -> str:
    """Contents of the last fenced block; an info string on the fence line is dropped."""
    blocks = code_blocks(text)
    if not blocks:
        raise ExtractionError("no triple-backtick code block in response")
    return blocks[-1].body


def parse_llm_fitness(text: str) -> float:
    numbers = _NUMBER.findall(text)
    if not numbers:
        raise ExtractionError("no numeric token in fitness response")
    return min(100.0, max(0.0, float(numbers[-1])))


def _degraded(problem: str, why: str, text: str) -> ErrorReport:
    log.warning("unusable %s error-detector output (%s): %.200r", problem, why, text)
    return {"sk": SudokuErrors, "gc": ColoringErrors, "tsp": RouteErrors}[problem]()


def _ints(line: str) -> list[int]:
    return [int(tok) for tok in line.split(",")]


def _parse_sudoku_errors(text: str) -> ErrorReport:
    blocks = code_blocks(text)
    if not blocks:
        return _degraded("sk", "no code block", text)
    body = blocks[-1].body.strip()
    if body == "Syntax is wrong":
        return SudokuErrors(syntax_error=True)
    if body == "No errors":
        return SudokuErrors()
    types = {name: t for t, name in enumerate(SudokuErrors.CONSTRAINTS)}
    cells = []
    for line in body.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or parts[2] not in types:
            return _degraded("sk", f"bad line {line!r}", text)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            return _degraded("sk", f"bad line {line!r}", text)
        if not (0 <= i < 9 and 0 <= j < 9):
            return _degraded("sk", f"cell out of range {line!r}", text)
        cells.append((i, j, types[parts[2]]))
    return SudokuErrors(cells=tuple(cells))


def _tagged(text: str) -> dict[str, str]:
    tags = {}
    for block in code_blocks(text):
        if block.lang in ("t1", "t2.1", "t2.2", "t3"):
            tags[block.lang] = block.body.strip()
    return tags


def _parse_tagged(problem: str, text: str) -> ErrorReport:
    tags = _tagged(text)
    if not tags:
        return _degraded(problem, "no tagged block", text)
    if "t1" in tags:
        if len(tags) > 1:
            return _degraded(problem, "syntax error alongside other reports", text)
        return ColoringErrors(syntax_error=True) if problem == "gc" else RouteErrors(syntax_error=True)
    if "t3" in tags:
        if len(tags) > 1:
            return _degraded(problem, "'No errors' alongside other reports", text)
        return ColoringErrors() if problem == "gc" else RouteErrors()
    try:
        if problem == "gc":
            edges = []
            for line in tags.get("t2.1", "").splitlines():
                if line.strip():
                    u, v, _color = _ints(line)
                    edges.append((u, v))
            excess = int(tags["t2.2"]) if "t2.2" in tags else 0
            return ColoringErrors(conflict_edges=tuple(edges), excess_colors=excess)
        missing = tuple(_ints(tags["t2.1"])) if tags.get("t2.1") else ()
        excess_d = float(tags["t2.2"]) if "t2.2" in tags else 0.0
        return RouteErrors(missing_cities=missing, excess_distance=excess_d)
    except ValueError as exc:
        return _degraded(problem, str(exc), text)


def parse_llm_errors(text: str, problem: str) -> ErrorReport:
    """Read an LLM error-detector response; garbage yields an empty report, never an exception."""
    if problem == "sk":
        return _parse_sudoku_errors(text)
    if problem in ("gc", "tsp"):
        return _parse_tagged(problem, text)
    raise ValueError(f"unknown problem kind {problem!r}")
