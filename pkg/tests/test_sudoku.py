import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evogate.core import Candidate, SudokuErrors
from evogate.problems.sudoku import (
    SudokuProblem,
    count_solutions,
    parse_grid,
    render_grid,
    semantic_errors,
    sudoku_correct,
    sudoku_eco,
    sudoku_emo,
    sudoku_penalized_score,
    sudoku_score,
)

plugin = SudokuProblem()


def recount_units(grid):
    """Plain loops, no shared helpers."""
    ok_rows = ok_cols = ok_boxes = 0
    for k in range(9):
        if sorted(grid[k]) == list(range(1, 10)):
            ok_rows += 1
        if sorted(grid[r][k] for r in range(9)) == list(range(1, 10)):
            ok_cols += 1
        br, bc = 3 * (k // 3), 3 * (k % 3)
        if sorted(grid[br + a][bc + b] for a in range(3) for b in range(3)) == list(range(1, 10)):
            ok_boxes += 1
    return ok_rows, ok_cols, ok_boxes


def naive_solutions(grid, limit=2):
    g = [list(r) for r in grid]

    def allowed(i, j, v):
        if v in g[i] or any(g[r][j] == v for r in range(9)):
            return False
        bi, bj = 3 * (i // 3), 3 * (j // 3)
        return all(g[bi + a][bj + b] != v for a in range(3) for b in range(3))

    count = 0

    def go(pos):
        nonlocal count
        while pos < 81 and g[pos // 9][pos % 9]:
            pos += 1
        if pos == 81:
            count += 1
            return
        i, j = divmod(pos, 9)
        for v in range(1, 10):
            if count >= limit:
                return
            if allowed(i, j, v):
                g[i][j] = v
                go(pos + 1)
                g[i][j] = 0

    go(0)
    return count


def perturbed(puzzle, rng, rate):
    grid = [list(r) for r in puzzle.solution]
    for i, j in puzzle.removed_positions:
        if rng.random() < rate:
            grid[i][j] = rng.randint(1, 9)
    return tuple(map(tuple, grid))


def test_generated_puzzle_shape(sk_puzzle):
    assert len(sk_puzzle.removed_positions) == 40
    assert sum(v == 0 for row in sk_puzzle.grid for v in row) == 40
    assert count_solutions(sk_puzzle.grid) == 1
    assert naive_solutions(sk_puzzle.grid) == 1
    plugin.validate_instance(sk_puzzle)


def test_solution_counter_sees_multiple_solutions(sk_puzzle):
    empty = tuple((0,) * 9 for _ in range(9))
    assert count_solutions(empty, limit=5) == 5
    bad = [list(r) for r in sk_puzzle.grid]
    bad[0][0] = bad[0][1] = 5 if bad[0][0] == 0 else bad[0][0]
    assert count_solutions(bad) == 0


def test_solution_scores_100(sk_puzzle):
    s = sk_puzzle.solution
    assert sudoku_score(s) == 100.0 and sudoku_penalized_score(s) == 100.0
    assert sudoku_correct(s, sk_puzzle)
    assert plugin.is_correct(Candidate(render_grid(s), s), sk_puzzle)


def test_metrics_match_recount(sk_puzzle):
    rng = random.Random(1)
    for _ in range(200):
        g = perturbed(sk_puzzle, rng, rng.choice([0.05, 0.2, 0.6]))
        r, c, b = recount_units(g)
        assert sudoku_score(g) == pytest.approx(100 * (r + c + b) / 27, abs=1e-9)
        assert sudoku_penalized_score(g) == pytest.approx(100 * (r * c * b / 729) ** (1 / 3), abs=1e-9)
        assert sudoku_penalized_score(g) <= sudoku_score(g) + 1e-9


def test_penalized_score_zero_when_one_unit_type_all_fail():
    g = tuple(tuple(range(1, 10)) for _ in range(9))  # every row valid, no column valid
    assert recount_units(g) == (9, 0, 0)
    assert sudoku_penalized_score(g) == 0.0
    assert sudoku_score(g) == pytest.approx(100 / 3)


def test_correct_requires_givens(sk_puzzle):
    # relabelling digits keeps the grid valid but changes givens
    swap = {1: 2, 2: 1}
    g = tuple(tuple(swap.get(v, v) for v in row) for row in sk_puzzle.solution)
    assert sudoku_penalized_score(g) == 100.0
    assert not sudoku_correct(g, sk_puzzle)


def test_parse_and_render_roundtrip(sk_puzzle):
    text = render_grid(sk_puzzle.solution)
    assert parse_grid(text) == sk_puzzle.solution
    assert parse_grid("\n" + text.replace(" ", "  ") + "\n\n") == sk_puzzle.solution


@pytest.mark.parametrize("text", [
    "", "1 2 3", "\n".join(["1 2 3 4 5 6 7 8 ."] * 9), "\n".join(["1 2 3 4 5 6 7 8 10"] * 9),
    "\n".join(["1 2 3 4 5 6 7 8 9"] * 8), "\n".join(["1 2 3 4 5 6 7 8 9 1"] * 9),
])
def test_parse_rejects_malformed(text):
    c = plugin.parse(text, None)
    assert not c.ok and plugin.oracle_fitness(c, None) == 0.0


def test_semantic_errors_are_duplicate_blank_cells(sk_puzzle):
    i, j = sk_puzzle.removed_positions[0]
    g = [list(r) for r in sk_puzzle.solution]
    # copy a value from elsewhere in the same row into the blank cell
    other = next(k for k in range(9) if k != j)
    g[i][j] = g[i][other]
    g = tuple(map(tuple, g))
    errs = semantic_errors(g, sk_puzzle)
    assert (i, j, 0) in errs
    assert all((a, b) in set(sk_puzzle.removed_positions) for a, b, _ in errs)
    assert list(errs) == sorted(errs)
    assert semantic_errors(sk_puzzle.solution, sk_puzzle) == ()


def test_detect_errors_truncates(sk_puzzle):
    g = perturbed(sk_puzzle, random.Random(3), 0.8)
    full = plugin.detect_errors(Candidate(render_grid(g), g), sk_puzzle, 100)
    assert len(full.cells) > 3
    short = plugin.detect_errors(Candidate(render_grid(g), g), sk_puzzle, 3)
    assert short.cells == full.cells[:3]
    assert plugin.detect_errors(plugin.parse("nope", sk_puzzle), sk_puzzle, 3) == SudokuErrors(True)


def _cand(g):
    return Candidate(render_grid(g), g)


def test_eco_returns_perfect_parent(sk_puzzle):
    good = _cand(sk_puzzle.solution)
    bad = _cand(perturbed(sk_puzzle, random.Random(4), 0.5))
    assert sudoku_eco(good, bad, sk_puzzle) is good
    assert sudoku_eco(bad, good, sk_puzzle) is good


def test_eco_copies_c1_values_into_c2_error_cells(sk_puzzle):
    rng = random.Random(8)
    for _ in range(50):
        a = _cand(perturbed(sk_puzzle, rng, 0.3))
        b = _cand(perturbed(sk_puzzle, rng, 0.3))
        child = sudoku_eco(a, b, sk_puzzle)
        err_a = {(i, j) for i, j, _ in semantic_errors(a.parsed, sk_puzzle)}
        err_b = {(i, j) for i, j, _ in semantic_errors(b.parsed, sk_puzzle)}
        if not err_a or not err_b:
            continue
        for i in range(9):
            for j in range(9):
                if (i, j) in err_b and (i, j) in set(sk_puzzle.removed_positions) - err_a:
                    assert child.parsed[i][j] == a.parsed[i][j]
                else:
                    assert child.parsed[i][j] == b.parsed[i][j]


def test_emo_changes_at_most_one_error_cell(sk_puzzle):
    rng = random.Random(9)
    for _ in range(50):
        c = _cand(perturbed(sk_puzzle, rng, 0.3))
        out = sudoku_emo(c, sk_puzzle, rng)
        diff = [(i, j) for i in range(9) for j in range(9) if out.parsed[i][j] != c.parsed[i][j]]
        errs = {(i, j) for i, j, _ in semantic_errors(c.parsed, sk_puzzle)}
        assert len(diff) <= 1 and set(diff) <= errs
    perfect = _cand(sk_puzzle.solution)
    assert sudoku_emo(perfect, sk_puzzle, rng) is perfect


def test_operators_pass_through_syntax_failures(sk_puzzle):
    bad = plugin.parse("garbage", sk_puzzle)
    good = _cand(sk_puzzle.solution)
    assert sudoku_eco(bad, good, sk_puzzle) is good
    assert sudoku_eco(good, bad, sk_puzzle) is good
    assert sudoku_emo(bad, sk_puzzle, random.Random(0)) is bad


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(1, 9)), max_size=30))
def test_score_bounds_property(sk_puzzle, edits):
    g = [list(r) for r in sk_puzzle.solution]
    for i, j, v in edits:
        g[i][j] = v
    g = tuple(map(tuple, g))
    ps, sc = sudoku_penalized_score(g), sudoku_score(g)
    assert 0 <= ps <= sc + 1e-9 and sc <= 100


def test_instance_dict_roundtrip(sk_puzzle):
    d = plugin.instance_to_dict(sk_puzzle)
    assert plugin.instance_from_dict(d) == sk_puzzle


def test_synthetic_answer_parses(sk_puzzle):
    from evogate.llm.parsing import extract_solution_block

    rng = random.Random(0)
    for _ in range(10):
        c = plugin.parse(extract_solution_block(plugin.synthetic_answer(sk_puzzle, rng)), sk_puzzle)
        assert c.ok
