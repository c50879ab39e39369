"""Graph-reachability task: which of two candidates can be reached from a root.

Each sample is a directed acyclic graph with two components. The reachable
component holds the root, a 4-5 edge chain ending at the correct candidate,
and distractor branches (the root always has at least two out-edges, so
breadth-first exploration must choose). The other component holds the wrong
candidate, which therefore has in-edges but is unreachable from the root.
Chain nodes other than the root never receive distractor edges, so the stored
chain is the unique root-to-candidate path. Node labels are shuffled small
integers; the answer is the chain followed by the choice label A or B.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .base import Sample, assign_splits

ROOT_MARK = "<root>"
CHOICES_MARK = "<choices>"
LABELS = ("A", "B")


def reachable_from(edges, root) -> set:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    seen = {root}
    q = deque([root])
    while q:
        for nb in adj.get(q.popleft(), ()):
            if nb not in seen:
                seen.add(nb)
                q.append(nb)
    return seen


def _build_graph(rng: np.random.Generator):
    """Structural node ids in construction order, edges old->new (acyclic)."""
    n_steps = int(rng.integers(4, 6))
    chain = list(range(n_steps + 1))
    root, correct = chain[0], chain[-1]
    edges = [(chain[i], chain[i + 1]) for i in range(n_steps)]

    nxt = n_steps + 1
    distractors = []
    for i in range(int(rng.integers(3, 7))):
        # first distractor hangs off the root so the root branches
        pool = chain[:-1] + distractors
        parent = root if i == 0 else int(pool[int(rng.integers(len(pool)))])
        edges.append((parent, nxt))
        distractors.append(nxt)
        nxt += 1
    for d in distractors[1:]:
        if rng.random() < 0.3:
            pool = [p for p in chain[:-1] + distractors if p < d]
            edges.append((int(pool[int(rng.integers(len(pool)))]), d))

    far = [nxt]
    nxt += 1
    for _ in range(int(rng.integers(2, 5))):
        edges.append((int(far[int(rng.integers(len(far)))]), nxt))
        far.append(nxt)
        nxt += 1
    wrong = far[-1]
    return nxt, sorted(set(edges)), chain, root, correct, wrong


def gen_dag_reachability(rng: np.random.Generator, count: int = 4000) -> list[Sample]:
    """Exactly-one-reachable two-candidate graphs, split 90/5/5."""
    samples = []
    seen = set()
    attempts = 0
    while len(samples) < count:
        attempts += 1
        if attempts > 40 * count:
            raise RuntimeError("too many rejected graphs")
        n_nodes, edges, chain, root, correct, wrong = _build_graph(rng)
        reach = reachable_from(edges, root)
        if correct not in reach or wrong in reach:
            continue
        label = [int(x) for x in rng.permutation(n_nodes)]
        edges = sorted((label[u], label[v]) for u, v in edges)
        chain = [label[c] for c in chain]
        root, correct, wrong = label[root], label[correct], label[wrong]

        choices = [correct, wrong] if rng.random() < 0.5 else [wrong, correct]
        q_toks = [str(x) for uv in edges for x in uv]
        q_toks += [ROOT_MARK, str(root), CHOICES_MARK, str(choices[0]), str(choices[1])]
        question = " ".join(q_toks)
        if question in seen:
            continue
        seen.add(question)
        answer = " ".join([*(str(c) for c in chain), LABELS[choices.index(correct)]])
        samples.append(
            Sample(
                question=question,
                answer=answer,
                metadata={
                    "task": "dag",
                    "n_nodes": n_nodes,
                    "chain_len": len(chain) - 1,
                    "correct": correct,
                    "wrong": wrong,
                },
            )
        )
    assign_splits(samples, {"train": 0.90, "val": 0.05, "test": 0.05})
    return samples


def parse_question(text: str):
    """(edges, root, choices) back from the question string."""
    toks = text.split()
    i = toks.index(ROOT_MARK)
    pair_toks = toks[:i]
    if len(pair_toks) % 2:
        raise ValueError("odd edge token count")
    edges = [(int(pair_toks[k]), int(pair_toks[k + 1])) for k in range(0, len(pair_toks), 2)]
    rest = toks[i:]
    if len(rest) != 5 or rest[2] != CHOICES_MARK:
        raise ValueError("malformed root/choices section")
    return edges, int(rest[1]), (int(rest[3]), int(rest[4]))
