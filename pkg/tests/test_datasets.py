"""Dataset generator tests: independent oracles, determinism, round-trips.

Every validator here is coded from scratch against the serialized sample
text, deliberately using different algorithms and data structures than the
generators (sets and static recursion instead of bitmasks and MRV, DFS path
enumeration instead of BFS), so agreement is evidence and not tautology.
"""

from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latent_lookahead import datasets as ds
from latent_lookahead.datasets import dag as dag_mod
from latent_lookahead.datasets import maze as maze_mod
from latent_lookahead.datasets import sudoku as sudoku_mod

# ---------------------------------------------------------------- oracles


def ref_box_shape(side):
    return {4: (2, 2), 9: (3, 3)}[side]


def ref_grid_valid(grid, side) -> bool:
    """Complete-grid constraint check via sorted-list comparison."""
    want = list(range(1, side + 1))
    rows = [sorted(row) for row in grid]
    cols = [sorted(grid[r][c] for r in range(side)) for c in range(side)]
    br, bc = ref_box_shape(side)
    boxes = [
        sorted(grid[r0 + i][c0 + j] for i in range(br) for j in range(bc))
        for r0 in range(0, side, br)
        for c0 in range(0, side, bc)
    ]
    return all(unit == want for unit in rows + cols + boxes)


def ref_local_candidates(grid, r, c, side) -> set[int]:
    br, bc = ref_box_shape(side)
    r0, c0 = (r // br) * br, (c // bc) * bc
    used = set(grid[r]) | {grid[i][c] for i in range(side)}
    used |= {grid[r0 + i][c0 + j] for i in range(br) for j in range(bc)}
    return set(range(1, side + 1)) - used


def ref_count_solutions(puzzle, side, cap=2) -> int:
    """Uniqueness check with python sets; blanks visited in static order for
    4x4, fewest-candidates-first for 9x9 (tractability, not correctness)."""
    grid = [list(row) for row in puzzle]
    blanks = [(r, c) for r in range(side) for c in range(side) if grid[r][c] == 0]

    def rec(remaining):
        if not remaining:
            return 1
        if side == 4:
            pick = 0
        else:
            pick = min(
                range(len(remaining)),
                key=lambda i: len(ref_local_candidates(grid, *remaining[i], side)),
            )
        r, c = remaining[pick]
        rest = remaining[:pick] + remaining[pick + 1 :]
        total = 0
        for v in sorted(ref_local_candidates(grid, r, c, side)):
            grid[r][c] = v
            total += rec(rest)
            grid[r][c] = 0
            if total >= cap:
                break
        return total

    return rec(blanks)


def ref_all_simple_paths(edges, start, goal) -> list[list]:
    """Every simple path start->goal over undirected edges, by DFS."""
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    paths = []

    def walk(node, path):
        if node == goal:
            paths.append(path[:])
            return
        for nb in adj.get(node, ()):
            if nb not in path:
                path.append(nb)
                walk(nb, path)
                path.pop()

    walk(start, [start])
    return paths


def ref_reachable(edges, root) -> set:
    """Directed reachability via explicit-stack DFS."""
    adj: dict = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(adj.get(node, ()))
    return seen


def mutate_grid(rng, grid, side):
    bad = [row[:] for row in grid]
    r, c = int(rng.integers(side)), int(rng.integers(side))
    old = bad[r][c]
    bad[r][c] = 1 + (old % side)
    return bad


# ------------------------------------------------------------ mini sudoku


@pytest.fixture(scope="module")
def mini_samples():
    return ds.gen_mini_sudoku(np.random.default_rng(123), 150)


@pytest.fixture(scope="module")
def full_samples():
    return ds.gen_full_sudoku(np.random.default_rng(5), 40)


class TestMiniSudoku:
    def test_oracle_validation(self, mini_samples):
        ambiguous_blank_seen = False
        for s in mini_samples:
            puzzle = ds.text_to_grid(s.question, 4).tolist()
            answer = ds.text_to_grid(s.answer, 4).tolist()
            assert ref_grid_valid(answer, 4)
            blanks = [(r, c) for r in range(4) for c in range(4) if puzzle[r][c] == 0]
            assert 8 <= len(blanks) <= 12
            assert all(
                puzzle[r][c] in (0, answer[r][c]) for r in range(4) for c in range(4)
            )
            assert ref_count_solutions(puzzle, 4) == 1
            if any(len(ref_local_candidates(puzzle, r, c, 4)) >= 2 for r, c in blanks):
                ambiguous_blank_seen = True
        # locally ambiguous cells must still be globally forced
        assert ambiguous_blank_seen

    def test_token_lengths(self, mini_samples):
        for s in mini_samples:
            assert len(s.question.split()) == 19
            assert len(s.answer.split()) == 19

    def test_zero_blanks_answer_equals_question(self):
        puzzle, solution = sudoku_mod.make_puzzle(np.random.default_rng(0), 4, 0)
        assert np.array_equal(puzzle, solution)
        assert sudoku_mod.grid_to_text(puzzle) == sudoku_mod.grid_to_text(solution)

    def test_default_split_sizes(self):
        samples = ds.gen_mini_sudoku(np.random.default_rng(77), 2000)
        counts = {}
        for s in samples:
            counts[s.split] = counts.get(s.split, 0) + 1
        assert counts == {"train": 1800, "test": 200}

    def test_questions_unique_and_splits_disjoint(self, mini_samples):
        assert len({s.question for s in mini_samples}) == len(mini_samples)


class TestFullSudoku:
    def test_oracle_validation(self, full_samples):
        for s in full_samples:
            puzzle = ds.text_to_grid(s.question, 9).tolist()
            answer = ds.text_to_grid(s.answer, 9).tolist()
            assert ref_grid_valid(answer, 9)
            n_blanks = sum(row.count(0) for row in puzzle)
            assert 32 <= n_blanks <= 50
            assert all(
                puzzle[r][c] in (0, answer[r][c]) for r in range(9) for c in range(9)
            )
            assert ref_count_solutions(puzzle, 9) == 1

    def test_token_lengths(self, full_samples):
        for s in full_samples:
            assert len(s.question.split()) == 89
            assert len(s.answer.split()) == 89

    def test_dual_constraint_checkers_agree(self):
        rng = np.random.default_rng(31)
        n_valid = n_invalid = 0
        for i in range(1000):
            side = 4 if i % 2 else 9
            grid = sudoku_mod.fill_grid(rng, side).tolist()
            if i % 3 == 0:
                grid = mutate_grid(rng, grid, side)
            lib = sudoku_mod.grid_is_valid(np.array(grid))
            assert lib == ref_grid_valid(grid, side)
            n_valid += lib
            n_invalid += not lib
        assert n_valid and n_invalid


# ------------------------------------------------------------------ maze


@pytest.fixture(scope="module")
def maze_samples():
    return ds.gen_maze(np.random.default_rng(7), 300)


class TestMaze:
    def test_oracle_validation(self, maze_samples):
        for s in maze_samples:
            edges, start, goal = maze_mod.parse_question(s.question)
            path = maze_mod.parse_answer(s.answer)
            assert len(edges) == 48
            cells = {c for e in edges for c in e}
            assert len(cells) == 49
            assert start != goal
            # spanning tree: the stored path is the one simple path
            paths = ref_all_simple_paths(edges, start, goal)
            assert paths == [path]
            assert path[0] == start and path[-1] == goal
            for (r1, c1), (r2, c2) in itertools.pairwise(path):
                assert abs(r1 - r2) + abs(c1 - c2) == 1
                assert tuple(sorted([(r1, c1), (r2, c2)])) in edges

    def test_2x2_exhaustive(self):
        rng = np.random.default_rng(3)
        trees = set()
        for _ in range(200):
            edges = maze_mod.carve_tree(rng, 2)
            assert len(edges) == 3
            trees.add(frozenset(edges))
            path = maze_mod.tree_path(edges, (0, 0), (1, 1))
            assert [path] == ref_all_simple_paths(edges, (0, 0), (1, 1))
            assert len(path) - 1 in (2, 3)
        # the 2x2 lattice cycle has exactly 4 spanning trees
        assert len(trees) == 4

    def test_token_round_trip(self, maze_samples):
        vocab = ds.build_vocabulary(maze_samples)
        for s in maze_samples[:100]:
            q_text = vocab.decode(vocab.encode(s.question))
            a_text = vocab.decode(vocab.encode(s.answer))
            assert maze_mod.parse_question(q_text) == maze_mod.parse_question(s.question)
            assert maze_mod.parse_answer(a_text) == maze_mod.parse_answer(s.answer)

    def test_split_fractions(self):
        samples = ds.gen_maze(np.random.default_rng(19), 400)
        counts = {}
        for s in samples:
            counts[s.split] = counts.get(s.split, 0) + 1
        assert counts == {"train": 360, "val": 20, "test": 20}


# ------------------------------------------------------------------- dag


@pytest.fixture(scope="module")
def dag_samples():
    return ds.gen_dag_reachability(np.random.default_rng(11), 300)


class TestDag:
    def test_oracle_validation(self, dag_samples):
        for s in dag_samples:
            edges, root, choices = dag_mod.parse_question(s.question)
            toks = s.answer.split()
            chain = [int(t) for t in toks[:-1]]
            label = toks[-1]
            assert label in ("A", "B")
            correct = choices[0] if label == "A" else choices[1]
            wrong = choices[1] if label == "A" else choices[0]
            reach = ref_reachable(edges, root)
            assert correct in reach and wrong not in reach
            assert chain[0] == root and chain[-1] == correct
            assert len(chain) - 1 in (4, 5)
            eset = set(edges)
            assert all(pair in eset for pair in itertools.pairwise(chain))
            # exploration is branching, the decoy is not a giveaway
            assert sum(u == root for u, v in edges) >= 2
            assert any(v == wrong for u, v in edges)

    def test_acyclic(self, dag_samples):
        for s in dag_samples[:50]:
            edges, root, _ = dag_mod.parse_question(s.question)
            # a cycle would make some node reachable from itself
            for node in {u for u, v in edges}:
                succ = ref_reachable(edges, node) - {node}
                assert node not in succ

    def test_chain_only_graph(self):
        edges = [(0, 1), (1, 2), (2, 3), (3, 4)]
        assert ref_reachable(edges, 0) == {0, 1, 2, 3, 4}
        assert ds.reachable_from(edges, 0) == {0, 1, 2, 3, 4}
        assert 5 not in ref_reachable(edges, 0)

    def test_split_fractions(self, dag_samples):
        counts = {}
        for s in dag_samples:
            counts[s.split] = counts.get(s.split, 0) + 1
        assert counts == {"train": 270, "val": 15, "test": 15}


# ------------------------------------------------------------ vocabulary


class TestVocabulary:
    def test_mini_vocab_exact(self, mini_samples):
        vocab = ds.build_vocabulary(mini_samples)
        assert vocab.symbols == ("1", "2", "3", "4", ";", "_", "|", "<pad>", "<pause>", "<eoa>")
        assert vocab.size == 10

    def test_full_vocab_size(self, full_samples):
        vocab = ds.build_vocabulary(full_samples)
        assert vocab.size == 15

    def test_specials_have_distinct_ids(self, mini_samples):
        vocab = ds.build_vocabulary(mini_samples)
        assert len({vocab.pad_id, vocab.pause_id, vocab.eoa_id}) == 3

    def test_unknown_symbol_raises(self, mini_samples):
        vocab = ds.build_vocabulary(mini_samples)
        with pytest.raises(ValueError, match="unknown symbol"):
            vocab.encode("1 2 x")

    def test_empty_corpus_raises(self):
        with pytest.raises(ValueError, match="empty"):
            ds.build_vocabulary([])

    def test_sample_token_ids_structure(self, mini_samples):
        vocab = ds.build_vocabulary(mini_samples)
        ids, answer_start = ds.sample_token_ids(mini_samples[0], vocab)
        assert len(ids) == 40
        assert answer_start == 20
        assert ids[19] == vocab.id_of(";")
        assert ids[-1] == vocab.eoa_id

    def test_corpus_round_trip(self, mini_samples, maze_samples, dag_samples):
        for samples in (mini_samples, maze_samples, dag_samples):
            vocab = ds.build_vocabulary(samples)
            for s in samples:
                for text in (s.question, s.answer):
                    assert vocab.decode(vocab.encode(text)) == text

    @given(st.lists(st.sampled_from(["1", "2", "3", "4", ";", "_", "|"]), min_size=1, max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, symbols):
        vocab = ds.Vocabulary(("1", "2", "3", "4", ";", "_", "|") + ds.vocab.SPECIALS)
        text = " ".join(symbols)
        assert vocab.decode(vocab.encode(text)) == text

    def test_serialization_round_trip(self, mini_samples):
        vocab = ds.build_vocabulary(mini_samples)
        assert ds.Vocabulary.from_dict(vocab.to_dict()) == vocab


# ------------------------------------------------- determinism and files


class TestDeterminismAndIO:
    def test_seed_determinism_all_tasks(self):
        for gen, count in ((ds.gen_mini_sudoku, 40), (ds.gen_full_sudoku, 6), (ds.gen_maze, 40), (ds.gen_dag_reachability, 40)):
            a = gen(np.random.default_rng(2024), count)
            b = gen(np.random.default_rng(2024), count)
            assert [s.to_record() for s in a] == [s.to_record() for s in b]

    def test_write_read_round_trip(self, maze_samples, tmp_path):
        out = ds.write_dataset(maze_samples, tmp_path / "maze", task="maze", seed=7)
        back, manifest = ds.read_dataset(out)
        assert [s.to_record() for s in back] == [s.to_record() for s in maze_samples]
        assert manifest["task"] == "maze"
        assert manifest["seed"] == 7
        assert manifest["counts"] == {"train": 270, "val": 15, "test": 15}
        assert set(manifest["split_hashes"]) == {"train", "val", "test"}

    def test_write_byte_determinism(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            samples = ds.gen_mini_sudoku(np.random.default_rng(9), 30)
            out = ds.write_dataset(samples, tmp_path / name, task="mini_sudoku", seed=9)
            blobs.append((out / "data.jsonl").read_bytes() + (out / "manifest.json").read_bytes())
        assert blobs[0] == blobs[1]

    def test_manifest_hashes_cover_all_records(self, dag_samples, tmp_path):
        out = ds.write_dataset(dag_samples, tmp_path / "dag", task="dag", seed=11)
        manifest = json.loads((out / "manifest.json").read_text())
        assert sum(manifest["counts"].values()) == len(dag_samples)
