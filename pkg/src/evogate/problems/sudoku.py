"""Sudoku: generation, parsing, scoring, verifier error detection, external operators."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any

from ..core import Candidate, SudokuErrors, SyntaxFailure

N = 9
BOX = 3
BLANKS = 40
DIGITS = frozenset(range(1, 10))

Grid = tuple[tuple[int, ...], ...]


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SudokuPuzzle:
    grid: Grid  # 0 marks a blank
    solution: Grid
    removed_positions: tuple[tuple[int, int], ...]

    @property
    def givens(self) -> list[tuple[int, int]]:
        removed = set(self.removed_positions)
        return [(i, j) for i in range(N) for j in range(N) if (i, j) not in removed]


def box_index(i: int, j: int) -> int:
    return (i // BOX) * BOX + j // BOX


def units(grid: Grid) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    rows = [list(r) for r in grid]
    cols = [[grid[i][j] for i in range(N)] for j in range(N)]
    boxes = [[grid[b // BOX * BOX + k // BOX][b % BOX * BOX + k % BOX] for k in range(N)]
             for b in range(N)]
    return rows, cols, boxes


def valid_unit_counts(grid: Grid) -> tuple[int, int, int]:
    return tuple(sum(set(u) == DIGITS for u in group) for group in units(grid))


def sudoku_score(grid: Grid) -> float:
    return 100.0 * sum(valid_unit_counts(grid)) / 27


def sudoku_penalized_score(grid: Grid) -> float:
    r, c, b = valid_unit_counts(grid)
    return 100.0 * ((r / N) * (c / N) * (b / N)) ** (1 / 3)


def sudoku_correct(grid: Grid, puzzle: SudokuPuzzle) -> bool:
    if valid_unit_counts(grid) != (N, N, N):
        return False
    return all(grid[i][j] == puzzle.grid[i][j] for i, j in puzzle.givens)


# ---------------------------------------------------------------------------
# Solving and generation

def count_solutions(grid: Grid | list[list[int]], limit: int = 2) -> int:
    """Backtracking solution counter (bitmask candidates, fewest-options-first), stops at ``limit``."""
    cells = [list(r) for r in grid]
    rows, cols, boxes = [0] * N, [0] * N, [0] * N
    empty = []
    for i in range(N):
        for j in range(N):
            v = cells[i][j]
            if v:
                bit = 1 << v
                b = box_index(i, j)
                if rows[i] & bit or cols[j] & bit or boxes[b] & bit:
                    return 0
                rows[i] |= bit
                cols[j] |= bit
                boxes[b] |= bit
            else:
                empty.append((i, j))
    full = 0b1111111110
    found = 0

    def search() -> None:
        nonlocal found
        best, best_opts, best_n = -1, 0, 10
        for k, (i, j) in enumerate(empty):
            if cells[i][j]:
                continue
            opts = full & ~(rows[i] | cols[j] | boxes[box_index(i, j)])
            n = bin(opts).count("1")
            if n < best_n:
                best, best_opts, best_n = k, opts, n
                if n <= 1:
                    break
        if best < 0:
            found += 1
            return
        if best_n == 0:
            return
        i, j = empty[best]
        b = box_index(i, j)
        for v in range(1, 10):
            bit = 1 << v
            if best_opts & bit:
                cells[i][j] = v
                rows[i] |= bit
                cols[j] |= bit
                boxes[b] |= bit
                search()
                rows[i] &= ~bit
                cols[j] &= ~bit
                boxes[b] &= ~bit
                cells[i][j] = 0
                if found >= limit:
                    return

    search()
    return min(found, limit)


def _random_full_grid(rng: random.Random) -> list[list[int]]:
    grid = [[0] * N for _ in range(N)]

    def fill(pos: int) -> bool:
        if pos == N * N:
            return True
        i, j = divmod(pos, N)
        digits = list(range(1, 10))
        rng.shuffle(digits)
        b0i, b0j = i // BOX * BOX, j // BOX * BOX
        for v in digits:
            if v in grid[i] or any(grid[r][j] == v for r in range(N)):
                continue
            if any(grid[b0i + r][b0j + c] == v for r in range(BOX) for c in range(BOX)):
                continue
            grid[i][j] = v
            if fill(pos + 1):
                return True
            grid[i][j] = 0
        return False

    fill(0)
    return grid


def generate_sudoku(rng: random.Random, blanks: int = BLANKS, max_restarts: int = 20) -> SudokuPuzzle:
    for _ in range(max_restarts):
        full = _random_full_grid(rng)
        grid = [row[:] for row in full]
        order = [(i, j) for i in range(N) for j in range(N)]
        rng.shuffle(order)
        removed = []
        for i, j in order:
            if len(removed) == blanks:
                break
            keep = grid[i][j]
            grid[i][j] = 0
            if count_solutions(grid, 2) == 1:
                removed.append((i, j))
            else:
                grid[i][j] = keep
        if len(removed) == blanks:
            return SudokuPuzzle(tuple(map(tuple, grid)), tuple(map(tuple, full)), tuple(sorted(removed)))
    raise GenerationError(f"could not remove {blanks} cells while keeping a unique solution")


# ---------------------------------------------------------------------------
# Text forms

def render_grid(grid: Grid, blank: str = ".") -> str:
    return "\n".join(" ".join(str(v) if v else blank for v in row) for row in grid)


def parse_grid(text: str) -> Grid:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if len(rows) != N:
        raise ValueError(f"expected {N} rows, got {len(rows)}")
    out = []
    for r, tokens in enumerate(rows):
        if len(tokens) != N:
            raise ValueError(f"row {r} has {len(tokens)} cells")
        if any(len(t) != 1 or t not in "123456789" for t in tokens):
            raise ValueError(f"row {r} holds a non-digit cell")
        out.append(tuple(int(t) for t in tokens))
    return tuple(out)


def _grid_from_puzzle_rows(rows: list[str]) -> Grid:
    return tuple(tuple(0 if tok == "." else int(tok) for tok in row.split()) for row in rows)


# ---------------------------------------------------------------------------
# Error detection and external operators

def semantic_errors(grid: Grid, puzzle: SudokuPuzzle) -> tuple[tuple[int, int, int], ...]:
    """Blank-position cells whose value repeats in their row / column / subgrid, row-major."""
    rows, cols, boxes = units(grid)
    groups = (rows, cols, boxes)
    out = []
    for i, j in sorted(puzzle.removed_positions):
        v = grid[i][j]
        for t, idx in enumerate((i, j, box_index(i, j))):
            if groups[t][idx].count(v) > 1:
                out.append((i, j, t))
    return tuple(out)


def sudoku_detect_errors(candidate: Candidate, puzzle: SudokuPuzzle, limit: int) -> SudokuErrors:
    if not candidate.ok:
        return SudokuErrors(syntax_error=True)
    return SudokuErrors(cells=semantic_errors(candidate.parsed, puzzle)[:limit])


def _with_cells(grid: Grid, updates: dict[tuple[int, int], int]) -> Candidate:
    new = tuple(tuple(updates.get((i, j), grid[i][j]) for j in range(N)) for i in range(N))
    return Candidate(render_grid(new), new)


def sudoku_eco(c1: Candidate, c2: Candidate, puzzle: SudokuPuzzle) -> Candidate:
    if not c1.ok:
        return c2
    if not c2.ok:
        return c1
    err1 = {(i, j) for i, j, _ in semantic_errors(c1.parsed, puzzle)}
    if not err1:
        return c1
    err2 = {(i, j) for i, j, _ in semantic_errors(c2.parsed, puzzle)}
    if not err2:
        return c2
    corrected_in_c1 = set(puzzle.removed_positions) - err1
    fix = err2 & corrected_in_c1
    return _with_cells(c2.parsed, {p: c1.parsed[p[0]][p[1]] for p in fix})


def sudoku_emo(c: Candidate, puzzle: SudokuPuzzle, rng: random.Random) -> Candidate:
    if not c.ok:
        return c
    positions = sorted({(i, j) for i, j, _ in semantic_errors(c.parsed, puzzle)})
    if not positions:
        return c
    p = rng.choice(positions)
    v = rng.randint(1, 9)
    return _with_cells(c.parsed, {p: v})


# ---------------------------------------------------------------------------
# Plugin

class SudokuProblem:
    kind = "sk"
    name = "sudoku"

    def parse(self, text: str, instance: SudokuPuzzle | None = None) -> Candidate:
        try:
            return Candidate(text, parse_grid(text))
        except ValueError as exc:
            return Candidate(text, SyntaxFailure(str(exc)))

    def format_solution(self, parsed: Grid) -> str:
        return render_grid(parsed)

    def prompt_bindings(self, puzzle: SudokuPuzzle) -> dict[str, Any]:
        return {"puzzle": render_grid(puzzle.grid), "subgrid_size": BOX,
                "puzzle_grid_size": N, "delta": 0}

    def oracle_fitness(self, candidate: Candidate, puzzle: SudokuPuzzle) -> float:
        return sudoku_penalized_score(candidate.parsed) if candidate.ok else 0.0

    def detect_errors(self, candidate: Candidate, puzzle: SudokuPuzzle, limit: int) -> SudokuErrors:
        return sudoku_detect_errors(candidate, puzzle, limit)

    def empty_errors(self) -> SudokuErrors:
        return SudokuErrors()

    def external_crossover(self, c1, c2, puzzle, rng) -> Candidate:
        return sudoku_eco(c1, c2, puzzle)

    def external_mutation(self, c, puzzle, rng) -> Candidate:
        return sudoku_emo(c, puzzle, rng)

    def is_correct(self, candidate: Candidate, puzzle: SudokuPuzzle) -> bool:
        return candidate.ok and sudoku_correct(candidate.parsed, puzzle)

    def metrics(self, candidate: Candidate, puzzle: SudokuPuzzle) -> dict[str, float | None]:
        if not candidate.ok:
            return {"CR": 0.0, "SC": 0.0, "PS": 0.0}
        return {"CR": float(sudoku_correct(candidate.parsed, puzzle)),
                "SC": sudoku_score(candidate.parsed),
                "PS": sudoku_penalized_score(candidate.parsed)}

    def generate_instance(self, rng: random.Random) -> SudokuPuzzle:
        return generate_sudoku(rng)

    def instance_to_dict(self, puzzle: SudokuPuzzle) -> dict[str, Any]:
        return {"grid": render_grid(puzzle.grid).splitlines(),
                "solution": render_grid(puzzle.solution).splitlines(),
                "removed_positions": [list(p) for p in puzzle.removed_positions]}

    def instance_from_dict(self, data: dict[str, Any]) -> SudokuPuzzle:
        return SudokuPuzzle(_grid_from_puzzle_rows(data["grid"]),
                            _grid_from_puzzle_rows(data["solution"]),
                            tuple(sorted(tuple(p) for p in data["removed_positions"])))

    def validate_instance(self, puzzle: SudokuPuzzle) -> None:
        blanks = {(i, j) for i in range(N) for j in range(N) if puzzle.grid[i][j] == 0}
        if blanks != set(puzzle.removed_positions):
            raise ValueError("blank cells do not match removed_positions")
        if valid_unit_counts(puzzle.solution) != (N, N, N):
            raise ValueError("stored solution is not a valid grid")
        if any(puzzle.grid[i][j] != puzzle.solution[i][j] for i, j in puzzle.givens):
            raise ValueError("stored solution disagrees with a given cell")
        if count_solutions(puzzle.grid, 2) != 1:
            raise ValueError("puzzle does not have exactly one completion")

    def identity(self, puzzle: SudokuPuzzle) -> Any:
        return puzzle.grid

    def synthetic_answer(self, puzzle: SudokuPuzzle, rng: random.Random) -> str:
        """An imperfect answer: the solution with some blanks overwritten at random."""
        rate = rng.choice((0.0, 0.05, 0.1, 0.2, 0.3))
        updates = {p: rng.randint(1, 9) for p in puzzle.removed_positions if rng.random() < rate}
        grid = _with_cells(puzzle.solution, updates).raw_text
        return f"Filling in the dots gives:\n```\n{grid}\n```"
