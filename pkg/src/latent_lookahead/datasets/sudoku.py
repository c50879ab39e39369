"""Sudoku generators with unique-solution guarantees.

Grids are filled by randomized backtracking, then cells are blanked one at a
time, keeping a removal only if the puzzle still has exactly one solution
(checked by a solution-counting backtracker that stops at 2). Serialization
is row-major with "_" for blanks and "|" between rows, so a 4x4 grid is 19
tokens and a 9x9 grid is 89.
"""

from __future__ import annotations

import numpy as np

from .base import Sample, assign_splits

BLANK = "_"
ROW_SEP = "|"


def _box_shape(side: int) -> tuple[int, int]:
    if side == 4:
        return 2, 2
    if side == 9:
        return 3, 3
    raise ValueError(f"unsupported grid side {side}")


def _units(side: int):
    """For each cell: the row, column, and box bit to update."""
    br, bc = _box_shape(side)
    box = [[(r // br) * br + (c // bc) for c in range(side)] for r in range(side)]
    return box


def fill_grid(rng: np.random.Generator, side: int) -> np.ndarray:
    """A completed valid grid via randomized backtracking (values 1..side)."""
    box = _units(side)
    grid = np.zeros((side, side), dtype=np.int64)
    rows = [0] * side
    cols = [0] * side
    boxes = [0] * side
    cells = [(r, c) for r in range(side) for c in range(side)]
    order = [list(rng.permutation(side) + 1) for _ in cells]

    def place(k: int) -> bool:
        if k == len(cells):
            return True
        r, c = cells[k]
        b = box[r][c]
        for v in order[k]:
            bit = 1 << v
            if rows[r] & bit or cols[c] & bit or boxes[b] & bit:
                continue
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
            grid[r, c] = v
            if place(k + 1):
                return True
            rows[r] ^= bit
            cols[c] ^= bit
            boxes[b] ^= bit
        grid[r, c] = 0
        return False

    if not place(0):
        raise RuntimeError("grid fill failed")
    return grid


def count_solutions(puzzle: np.ndarray, cap: int = 2) -> int:
    """Number of completions of a puzzle (0 = blank), counting up to cap.

    Most-constrained-cell ordering with bitmask candidate sets."""
    side = puzzle.shape[0]
    box = _units(side)
    full = ((1 << (side + 1)) - 1) & ~1
    rows = [0] * side
    cols = [0] * side
    boxes = [0] * side
    blanks = []
    for r in range(side):
        for c in range(side):
            v = int(puzzle[r, c])
            if v:
                bit = 1 << v
                if rows[r] & bit or cols[c] & bit or boxes[box[r][c]] & bit:
                    return 0
                rows[r] |= bit
                cols[c] |= bit
                boxes[box[r][c]] |= bit
            else:
                blanks.append((r, c))

    count = 0

    def search(remaining: list) -> None:
        nonlocal count
        if count >= cap:
            return
        if not remaining:
            count += 1
            return
        # most-constrained blank first
        best_i, best_opts = -1, None
        for i, (r, c) in enumerate(remaining):
            opts = full & ~(rows[r] | cols[c] | boxes[box[r][c]])
            n = opts.bit_count()
            if best_opts is None or n < best_n:
                best_i, best_opts, best_n = i, opts, n
                if n <= 1:
                    break
        if best_opts == 0:
            return
        r, c = remaining[best_i]
        rest = remaining[:best_i] + remaining[best_i + 1 :]
        b = box[r][c]
        opts = best_opts
        while opts:
            bit = opts & -opts
            opts ^= bit
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
            search(rest)
            rows[r] ^= bit
            cols[c] ^= bit
            boxes[b] ^= bit
            if count >= cap:
                return

    search(blanks)
    return count


def make_puzzle(rng: np.random.Generator, side: int, n_blanks: int, max_tries: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """(puzzle, solution) with exactly n_blanks blanks and a unique solution."""
    for _ in range(max_tries):
        solution = fill_grid(rng, side)
        puzzle = solution.copy()
        removed = 0
        for idx in rng.permutation(side * side):
            if removed == n_blanks:
                break
            r, c = divmod(int(idx), side)
            keep = puzzle[r, c]
            puzzle[r, c] = 0
            if count_solutions(puzzle) == 1:
                removed += 1
            else:
                puzzle[r, c] = keep
        if removed == n_blanks:
            return puzzle, solution
    raise RuntimeError(f"failed to blank {n_blanks} cells in {max_tries} tries")


def grid_to_text(grid: np.ndarray) -> str:
    rows = [" ".join(BLANK if v == 0 else str(v) for v in row) for row in grid.tolist()]
    return f" {ROW_SEP} ".join(rows)


def text_to_grid(text: str, side: int) -> np.ndarray:
    parts = [p for p in text.split() if p != ROW_SEP]
    if len(parts) != side * side:
        raise ValueError(f"expected {side * side} cells, got {len(parts)}")
    vals = [0 if p == BLANK else int(p) for p in parts]
    return np.array(vals, dtype=np.int64).reshape(side, side)


def grid_is_valid(grid: np.ndarray) -> bool:
    """Complete grid satisfying all row/column/box constraints."""
    side = grid.shape[0]
    want = set(range(1, side + 1))
    br, bc = _box_shape(side)
    for i in range(side):
        if set(grid[i].tolist()) != want or set(grid[:, i].tolist()) != want:
            return False
    for r0 in range(0, side, br):
        for c0 in range(0, side, bc):
            if set(grid[r0 : r0 + br, c0 : c0 + bc].ravel().tolist()) != want:
                return False
    return True


def _gen_sudoku(rng, count, side, blank_range, fractions) -> list[Sample]:
    lo, hi = blank_range
    samples: list[Sample] = []
    seen: set[str] = set()
    attempts = 0
    while len(samples) < count:
        attempts += 1
        if attempts > 20 * count:
            raise RuntimeError("too many duplicate puzzles; widen the blank range")
        n_blanks = int(rng.integers(lo, hi + 1))
        puzzle, solution = make_puzzle(rng, side, n_blanks)
        question = grid_to_text(puzzle)
        if question in seen:
            continue
        seen.add(question)
        samples.append(
            Sample(
                question=question,
                answer=grid_to_text(solution),
                metadata={
                    "task": f"sudoku{side}",
                    "n_blanks": n_blanks,
                    "blank_cells": np.argwhere(puzzle == 0).tolist(),
                },
            )
        )
    assign_splits(samples, fractions)
    return samples


def gen_mini_sudoku(rng: np.random.Generator, count: int = 2000) -> list[Sample]:
    """4x4 puzzles, 8-12 blanks, unique solutions, 90/10 train/test."""
    return _gen_sudoku(rng, count, 4, (8, 12), {"train": 0.9, "test": 0.1})


def gen_full_sudoku(rng: np.random.Generator, count: int = 4000) -> list[Sample]:
    """9x9 puzzles, 32-50 blanks, unique solutions, 90/10 train/val."""
    return _gen_sudoku(rng, count, 9, (32, 50), {"train": 0.9, "val": 0.1})
