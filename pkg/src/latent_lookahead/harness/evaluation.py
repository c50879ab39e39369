"""Greedy-decoding evaluation: exact-match accuracy plus per-sample records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datasets import EOA, grid_is_valid, text_to_grid
from ..datasets.vocab import Vocabulary
from ..lookahead import RANDOM, SEQUENTIAL, SINGLE, generate
from ..model import ModelWeights
from .data import EncodedSample

SUDOKU_SIDES = {"mini_sudoku": 4, "full_sudoku": 9, "sudoku4": 4, "sudoku9": 9}


@dataclass
class EvalResult:
    accuracy: float
    n: int
    records: list[dict] = field(default_factory=list)
    validity: float | None = None


def _sudoku_answer_valid(question: str, generated: str, side: int) -> bool:
    """Generated grid satisfies all constraints and keeps the given cells."""
    try:
        grid = text_to_grid(generated, side)
    except ValueError:
        return False
    puzzle = text_to_grid(question, side)
    givens = puzzle != 0
    return bool(grid_is_valid(grid) and np.array_equal(grid[givens], puzzle[givens]))


def evaluate(
    weights: ModelWeights,
    vocab: Vocabulary,
    encs: list[EncodedSample],
    *,
    variant: str,
    task: str = "",
    tau: int = 0,
    n_thoughts: int = 1,
    strategy: str = SEQUENTIAL,
    trigger_prob: float = 0.1,
    decode_mode: str = SINGLE,
    causal_within_thought: bool = False,
    batch_size: int = 64,
    rng: np.random.Generator | None = None,
    keep_records: bool = True,
) -> EvalResult:
    """Exact-match accuracy of greedy generation against the stored answers.

    Samples are grouped by prompt length so lockstep batching stays valid; the
    random trigger strategy decodes one sample at a time because its draws are
    shared across a batch.
    """
    if strategy == RANDOM:
        batch_size = 1
        if rng is None:
            raise ValueError("random strategy needs an rng")
    side = SUDOKU_SIDES.get(task)
    groups: dict[int, list[int]] = {}
    for i, e in enumerate(encs):
        groups.setdefault(e.answer_start, []).append(i)

    records: list[dict | None] = [None] * len(encs)
    correct = np.zeros(len(encs), dtype=bool)
    valid = np.zeros(len(encs), dtype=bool)
    for p_len, idxs in sorted(groups.items()):
        max_new = max(len(encs[i].ids) - p_len for i in idxs) + 1
        for lo in range(0, len(idxs), batch_size):
            chunk = idxs[lo : lo + batch_size]
            prompts = np.stack([encs[i].ids[:p_len] for i in chunk])
            result = generate(
                weights,
                prompts,
                variant=variant,
                eoa_id=vocab.eoa_id,
                tau=tau,
                n_thoughts=n_thoughts,
                strategy=strategy,
                trigger_prob=trigger_prob,
                pause_id=vocab.pause_id,
                max_new=max_new,
                decode_mode=decode_mode,
                causal_within_thought=causal_within_thought,
                rng=rng,
            )
            for b, i in enumerate(chunk):
                gold = encs[i].ids[p_len:].tolist()
                got = result.tokens[b]
                correct[i] = got == gold
                gen_text = vocab.decode(got)
                if gen_text.endswith(" " + EOA):
                    gen_text = gen_text[: -len(" " + EOA)]
                if side is not None:
                    valid[i] = _sudoku_answer_valid(encs[i].sample.question, gen_text, side)
                if keep_records:
                    records[i] = {
                        "question": encs[i].sample.question,
                        "gold": encs[i].sample.answer,
                        "generated": gen_text,
                        "correct": bool(correct[i]),
                        **({"valid": bool(valid[i])} if side is not None else {}),
                    }

    return EvalResult(
        accuracy=float(correct.mean()) if len(encs) else 0.0,
        n=len(encs),
        records=[r for r in records if r is not None],
        validity=float(valid.mean()) if side is not None and len(encs) else None,
    )
