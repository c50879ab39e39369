"""Procedural planning-task datasets with built-in validators."""

from .base import Sample, assign_splits
from .dag import gen_dag_reachability, reachable_from
from .io import read_dataset, write_dataset
from .maze import gen_maze, tree_path
from .sudoku import (
    count_solutions,
    gen_full_sudoku,
    gen_mini_sudoku,
    grid_is_valid,
    grid_to_text,
    text_to_grid,
)
from .vocab import (
    EOA,
    PAD,
    PAUSE,
    QA_SEP,
    Vocabulary,
    build_vocabulary,
    sample_token_ids,
)

GENERATORS = {
    "mini_sudoku": gen_mini_sudoku,
    "full_sudoku": gen_full_sudoku,
    "maze": gen_maze,
    "dag": gen_dag_reachability,
}

__all__ = [
    "EOA",
    "GENERATORS",
    "PAD",
    "PAUSE",
    "QA_SEP",
    "Sample",
    "Vocabulary",
    "assign_splits",
    "build_vocabulary",
    "count_solutions",
    "gen_dag_reachability",
    "gen_full_sudoku",
    "gen_maze",
    "gen_mini_sudoku",
    "grid_is_valid",
    "grid_to_text",
    "read_dataset",
    "reachable_from",
    "sample_token_ids",
    "text_to_grid",
    "tree_path",
    "write_dataset",
]
