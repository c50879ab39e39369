"""Project latent-token digit distributions onto the unit square.

For 4x4 Sudoku the four digit symbols get the square's corners as vertices
v1=(0,0), v2=(1,0), v3=(1,1), v4=(0,1); a distribution p over them maps to
the convex combination sum_k p_k v_k = (p2+p3, p3+p4). Refine mode tracks the
first latent slot of one thought across the unroll rounds (how its belief
about the next token sharpens); final mode projects every latent slot's
distribution from the final pass.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..datasets.vocab import Vocabulary
from ..lookahead import (
    LATENT_LOOKAHEAD,
    LATENT_VARIANTS,
    SEQUENTIAL,
    ThoughtSchedule,
    build_layout,
    select_positions,
    stack_layouts,
    unroll_train,
)
from ..model import ModelWeights, unembed
from .data import EncodedSample

DIGITS = ("1", "2", "3", "4")
VERTICES = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
REFINE = "refine"
FINAL = "final"
MODES = (REFINE, FINAL)

SIMPLEX_HEADER = ("anchor", "step", "p1", "p2", "p3", "p4", "x", "y", "correct")


def project(p) -> tuple[float, float]:
    """Convex combination of the square's vertices under weights p."""
    x = sum(float(pk) * vx for pk, (vx, _) in zip(p, VERTICES))
    y = sum(float(pk) * vy for pk, (_, vy) in zip(p, VERTICES))
    return x, y


def entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def digit_distribution(logits_row: np.ndarray, digit_ids: np.ndarray) -> np.ndarray:
    """Full-vocab softmax restricted to the digit symbols and renormalized."""
    z = np.asarray(logits_row, dtype=np.float64)
    z = z - z.max()
    full = np.exp(z)
    full /= full.sum()
    p = full[digit_ids]
    return p / p.sum()


def _unembed_row(weights: ModelWeights, row: np.ndarray) -> np.ndarray:
    t = nc.tensor(np.asarray(row, dtype=nc.default_dtype()).reshape(1, 1, -1))
    return np.asarray(unembed(weights, t).data).reshape(-1)


def simplex_rows(
    weights: ModelWeights,
    vocab: Vocabulary,
    enc: EncodedSample,
    *,
    tau: int,
    mode: str = REFINE,
    variant: str = LATENT_LOOKAHEAD,
    n_thoughts: int = 1,
    strategy: str = SEQUENTIAL,
    thought_index: int = 0,
    causal_within_thought: bool = False,
    rng: np.random.Generator | None = None,
) -> list[dict]:
    """Teacher-forced projection rows for one sample's chosen thought."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if variant not in LATENT_VARIANTS:
        raise ValueError(f"variant {variant} has no latent slots to project")
    try:
        digit_ids = np.array([vocab.id_of(d) for d in DIGITS])
    except ValueError:
        raise ValueError("simplex projection needs the four digit symbols 1-4") from None

    anchors = select_positions(len(enc.ids), enc.answer_start, n_thoughts, strategy, rng)
    schedule = ThoughtSchedule(anchors=anchors, tau=tau)
    layout = build_layout(enc.ids, enc.answer_start, variant, schedule, pause_id=vocab.pause_id)
    blayout = stack_layouts([layout])
    result = unroll_train(
        weights, blayout, causal_within_thought=causal_within_thought, capture_rounds=mode == REFINE
    )
    anchor = schedule.anchors[thought_index]
    tokens = enc.ids

    def target_digit(vis: int) -> str | None:
        if vis >= len(tokens):
            return None
        sym = vocab.symbols[int(tokens[vis])]
        return sym if sym in DIGITS else None

    rows = []
    if mode == REFINE:
        first_slot = layout.slot_of_thought(anchor, 1)
        anchor_slot = int(layout.slot_of_visible[anchor])
        want = target_digit(anchor + 1)
        for j in range(1, tau + 1):
            grid = result.round_hiddens[j - 1]
            row = grid[0, anchor_slot] if j == 1 else grid[0, first_slot]
            p = digit_distribution(_unembed_row(weights, row), digit_ids)
            x, y = project(p)
            got = DIGITS[int(np.argmax(p))]
            rows.append(_row(anchor, j, p, x, y, "" if want is None else int(got == want)))
    else:
        logits = np.asarray(result.logits.data)
        for j in range(1, tau + 1):
            slot = layout.slot_of_thought(anchor, j)
            p = digit_distribution(logits[0, slot], digit_ids)
            x, y = project(p)
            want = target_digit(anchor + j)
            got = DIGITS[int(np.argmax(p))]
            rows.append(_row(anchor, j, p, x, y, "" if want is None else int(got == want)))
    return rows


def _row(anchor, step, p, x, y, correct) -> dict:
    return {
        "anchor": int(anchor),
        "step": int(step),
        "p1": float(p[0]),
        "p2": float(p[1]),
        "p3": float(p[2]),
        "p4": float(p[3]),
        "x": float(x),
        "y": float(y),
        "correct": correct,
    }


def write_simplex_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SIMPLEX_HEADER)
        writer.writeheader()
        writer.writerows(rows)
