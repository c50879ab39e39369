"""Perfect-maze generator on a square lattice.

Randomized depth-first search carves a spanning tree over the cells, so any
two cells are joined by exactly one path. The question lists the carved
passages (adjacency pairs in canonical order) plus origin and target; the
answer is the unique cell path enclosed in <path_start>/<path_end> markers.
Cells are two-digit "rc" symbols.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import Sample, assign_splits

ADJ_START = "<adj_start>"
ADJ_END = "<adj_end>"
ORIGIN = "<origin>"
TARGET = "<target>"
PATH_START = "<path_start>"
PATH_END = "<path_end>"


def cell_symbol(r: int, c: int) -> str:
    return f"{r}{c}"


def parse_cell(sym: str) -> tuple[int, int]:
    if len(sym) != 2 or not sym.isdigit():
        raise ValueError(f"bad cell symbol {sym!r}")
    return int(sym[0]), int(sym[1])


def carve_tree(rng: np.random.Generator, side: int) -> set[tuple[tuple[int, int], tuple[int, int]]]:
    """Spanning-tree passages via iterative randomized DFS from a random
    root (a fixed root cannot reach every tree: on the 2x2 cycle it only
    yields the two walks starting there). Edges are stored with the
    lexicographically smaller cell first."""
    root = divmod(int(rng.integers(side * side)), side)
    visited = {root}
    stack = [root]
    edges = set()
    while stack:
        r, c = stack[-1]
        nbrs = [
            (r + dr, c + dc)
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= r + dr < side and 0 <= c + dc < side and (r + dr, c + dc) not in visited
        ]
        if not nbrs:
            stack.pop()
            continue
        nxt = nbrs[int(rng.integers(len(nbrs)))]
        visited.add(nxt)
        edges.add(tuple(sorted([(r, c), nxt])))
        stack.append(nxt)
    return edges


def tree_path(edges, start, goal) -> list[tuple[int, int]]:
    """The unique path between two cells of a spanning tree, via BFS."""
    adj: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    prev = {start: None}
    q = deque([start])
    while q:
        cur = q.popleft()
        if cur == goal:
            break
        for nb in adj.get(cur, ()):
            if nb not in prev:
                prev[nb] = cur
                q.append(nb)
    if goal not in prev:
        raise ValueError("goal unreachable; not a spanning tree")
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]


def serialize_question(edges, start, goal) -> str:
    pairs = sorted(edges)
    toks = [ADJ_START]
    for a, b in pairs:
        toks.append(cell_symbol(*a))
        toks.append(cell_symbol(*b))
    toks += [ADJ_END, ORIGIN, cell_symbol(*start), TARGET, cell_symbol(*goal)]
    return " ".join(toks)


def serialize_answer(path) -> str:
    return " ".join([PATH_START, *(cell_symbol(*c) for c in path), PATH_END])


def parse_question(text: str):
    """(edges, start, goal) back from the question string."""
    toks = text.split()
    if toks[0] != ADJ_START:
        raise ValueError("question must open with the adjacency section")
    i = toks.index(ADJ_END)
    pair_toks = toks[1:i]
    if len(pair_toks) % 2:
        raise ValueError("odd adjacency token count")
    edges = {
        tuple(sorted([parse_cell(pair_toks[k]), parse_cell(pair_toks[k + 1])]))
        for k in range(0, len(pair_toks), 2)
    }
    rest = toks[i + 1 :]
    if len(rest) != 4 or rest[0] != ORIGIN or rest[2] != TARGET:
        raise ValueError("malformed origin/target section")
    return edges, parse_cell(rest[1]), parse_cell(rest[3])


def parse_answer(text: str) -> list[tuple[int, int]]:
    toks = text.split()
    if toks[0] != PATH_START or toks[-1] != PATH_END:
        raise ValueError("answer must be wrapped in path markers")
    return [parse_cell(t) for t in toks[1:-1]]


def gen_maze(rng: np.random.Generator, count: int = 4000, grid_side: int = 7) -> list[Sample]:
    """Perfect mazes with random distinct origin/target, split 90/5/5."""
    if not 2 <= grid_side <= 9:
        raise ValueError("grid side must be in [2, 9] for two-digit cell symbols")
    samples = []
    seen = set()
    attempts = 0
    while len(samples) < count:
        attempts += 1
        if attempts > 20 * count:
            raise RuntimeError("too many duplicate mazes")
        edges = carve_tree(rng, grid_side)
        cells = grid_side * grid_side
        s_idx, g_idx = rng.choice(cells, size=2, replace=False)
        start = divmod(int(s_idx), grid_side)
        goal = divmod(int(g_idx), grid_side)
        question = serialize_question(edges, start, goal)
        if question in seen:
            continue
        seen.add(question)
        path = tree_path(edges, start, goal)
        samples.append(
            Sample(
                question=question,
                answer=serialize_answer(path),
                metadata={"task": "maze", "grid_side": grid_side, "path_len": len(path)},
            )
        )
    perm = rng.permutation(len(samples))
    samples = [samples[int(i)] for i in perm]
    assign_splits(samples, {"train": 0.90, "val": 0.05, "test": 0.05})
    return samples
