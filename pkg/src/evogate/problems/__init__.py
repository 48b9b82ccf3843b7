from .coloring import GraphColoringInstance, GraphColoringProblem
from .sudoku import SudokuProblem, SudokuPuzzle
from .tsp import TspInstance, TspProblem

PLUGINS = {
    "sk": SudokuProblem(),
    "gc": GraphColoringProblem(),
    "tsp": TspProblem(),
}


def get_plugin(kind: str):
    try:
        return PLUGINS[kind]
    except KeyError:
        raise ValueError(f"unknown problem {kind!r}; expected one of {sorted(PLUGINS)}") from None


__all__ = ["PLUGINS", "get_plugin", "GraphColoringInstance", "GraphColoringProblem",
           "SudokuProblem", "SudokuPuzzle", "TspInstance", "TspProblem"]
