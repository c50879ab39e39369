"""Inference: grow the expanded sequence one slot at a time.

Thoughts are produced with the same rollout restriction used in training
(latent slots read only visibles up to their anchor plus their own thought,
and no visible reads a latent), so the vectors generated here match the
training unroll exactly. Once a thought is complete, decode passes switch to
the final-phase mask and the next visible token is read off the refined first
latent slot (last slot for the unsupervised looped variant, last pause slot
for the pause baseline, the newest visible slot otherwise).

Batched generation runs in lockstep and therefore requires equal prompt
lengths and one shared anchor plan per batch; with the random strategy the
trigger draws are shared across the batch, so use batch size 1 (or small
batches) when per-sample anchor placement matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import numcore as nc
from ..model import BatchedInput, ModelWeights, forward, unembed
from .layout import (
    KIND_LATENT,
    KIND_PAUSE,
    KIND_VISIBLE,
    LATENT_LOOKAHEAD,
    LATENT_VARIANTS,
    LOOPED_UNSUPERVISED,
    PAUSE_TOKENS,
    VARIANTS,
)
from .masking import build_final_mask, build_rollout_mask, plain_causal
from .schedule import RANDOM, SEQUENTIAL, STRATEGIES

SINGLE = "single"
MULTI = "multi"
DECODE_MODES = (SINGLE, MULTI)


@dataclass
class ThoughtRecord:
    """Captured activations for one thought (consistency checks)."""

    anchor: int
    round_reads: list[np.ndarray]
    decode_hidden: np.ndarray | None = None


@dataclass
class GenerationResult:
    tokens: list[list[int]]
    n_forwards: int
    anchors: list[int]
    records: list[ThoughtRecord] = field(default_factory=list)


class _Grower:
    """Slot-by-slot expanded sequence shared by a lockstep batch."""

    def __init__(self, prompts: np.ndarray, d_model: int):
        self.B, P = prompts.shape
        self.d_model = d_model
        self.kinds = [KIND_VISIBLE] * P
        self.vis_index = list(range(P))
        self.step_j = [0] * P
        self.tok_cols = [prompts[:, i].astype(np.int64) for i in range(P)]
        self.inj_cols: dict[int, np.ndarray] = {}
        self.n_visible = P

    @property
    def length(self) -> int:
        return len(self.kinds)

    def append_visible(self, tok: np.ndarray) -> int:
        self.kinds.append(KIND_VISIBLE)
        self.vis_index.append(self.n_visible)
        self.step_j.append(0)
        self.tok_cols.append(tok.astype(np.int64))
        self.n_visible += 1
        return self.length - 1

    def append_thought_slot(self, kind: int, anchor: int, j: int, tok: np.ndarray | None, inj: np.ndarray | None) -> int:
        self.kinds.append(kind)
        self.vis_index.append(anchor)
        self.step_j.append(j)
        self.tok_cols.append(
            tok.astype(np.int64) if tok is not None else np.zeros(self.B, dtype=np.int64)
        )
        if inj is not None:
            self.inj_cols[self.length - 1] = inj
        return self.length - 1

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.array(self.kinds, dtype=np.int8),
            np.array(self.vis_index, dtype=np.int64),
            np.array(self.step_j, dtype=np.int64),
        )

    def batched_input(self) -> BatchedInput:
        L = self.length
        ids = np.stack(self.tok_cols, axis=1)
        positions = np.broadcast_to(np.arange(L, dtype=np.int64), (self.B, L)).copy()
        if not self.inj_cols:
            return BatchedInput(ids, positions)
        flag = np.zeros((self.B, L))
        injected = np.zeros((self.B, L, self.d_model))
        for s, col in self.inj_cols.items():
            flag[:, s] = 1.0
            injected[:, s] = col
        return BatchedInput(ids, positions, flag, nc.tensor(injected))

    def slot_of(self, anchor: int, j: int) -> int:
        for s in range(self.length - 1, -1, -1):
            if self.kinds[s] != KIND_VISIBLE and self.vis_index[s] == anchor and self.step_j[s] == j:
                return s
        raise KeyError(f"no slot (anchor={anchor}, j={j})")

    def slot_of_visible(self, v: int) -> int:
        for s in range(self.length - 1, -1, -1):
            if self.kinds[s] == KIND_VISIBLE and self.vis_index[s] == v:
                return s
        raise KeyError(f"no visible slot {v}")


def _hidden_at(weights: ModelWeights, grower: _Grower, mask: np.ndarray):
    return forward(weights, grower.batched_input(), mask, training=False)


def _feedback(weights: ModelWeights, grower: _Grower, mask: np.ndarray):
    from ..model import feedback_hidden

    return feedback_hidden(weights, grower.batched_input(), mask, training=False)


def _argmax_tokens(weights: ModelWeights, hidden_rows: nc.Tensor) -> np.ndarray:
    logits = unembed(weights, hidden_rows)
    return np.argmax(np.asarray(logits.data), axis=-1).astype(np.int64)


def generate(
    weights: ModelWeights,
    prompts: np.ndarray,
    *,
    variant: str,
    eoa_id: int,
    tau: int = 0,
    n_thoughts: int = 1,
    strategy: str = SEQUENTIAL,
    trigger_prob: float = 0.1,
    pause_id: int | None = None,
    max_new: int = 64,
    decode_mode: str = SINGLE,
    causal_within_thought: bool = False,
    rng: np.random.Generator | None = None,
    capture: bool = False,
) -> GenerationResult:
    """Greedy decoding of a lockstep batch of equal-length prompts.

    The first thought always anchors on the last prompt token. With the
    sequential strategy the remaining n_thoughts-1 anchors are the visible
    indices immediately after; with the random strategy each later visible
    token triggers a thought with probability trigger_prob until the budget
    is used (one shared draw per step for the whole batch).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if decode_mode not in DECODE_MODES:
        raise ValueError(f"unknown decode mode {decode_mode!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    has_thoughts = variant in LATENT_VARIANTS or variant == PAUSE_TOKENS
    if has_thoughts:
        if tau < 1:
            raise ValueError("thought variants need tau >= 1")
        if variant == PAUSE_TOKENS and pause_id is None:
            raise ValueError("pause variant needs pause_id")
    if strategy == RANDOM and rng is None:
        raise ValueError("random strategy needs rng")
    if decode_mode == MULTI and variant != LATENT_LOOKAHEAD:
        raise ValueError("multi-token decode requires the full lookahead variant")

    prompts = np.asarray(prompts, dtype=np.int64)
    cfg = weights.config
    grower = _Grower(prompts, cfg.d_model)
    B = grower.B
    out: list[list[int]] = [[] for _ in range(B)]
    done = np.zeros(B, dtype=bool)
    thoughts_left = n_thoughts if has_thoughts else 0
    pending_anchor = thoughts_left > 0
    anchors_used: list[int] = []
    records: list[ThoughtRecord] = []
    n_forwards = 0

    def emit(tok: np.ndarray) -> None:
        for b in range(B):
            if not done[b]:
                out[b].append(int(tok[b]))
                if tok[b] == eoa_id:
                    done[b] = True

    while not done.all() and max(len(o) for o in out) < max_new:
        anchor = grower.n_visible - 1
        ran_thought = False

        if pending_anchor and thoughts_left > 0:
            if grower.length + tau + 1 > cfg.max_positions:
                break
            ran_thought = True
            anchors_used.append(anchor)
            thoughts_left -= 1
            rec = ThoughtRecord(anchor=anchor, round_reads=[]) if capture else None
            if variant == PAUSE_TOKENS:
                for j in range(1, tau + 1):
                    grower.append_thought_slot(
                        KIND_PAUSE, anchor, j, np.full(B, pause_id, dtype=np.int64), None
                    )
            else:
                anchor_slot = grower.slot_of_visible(anchor)
                for j in range(1, tau + 1):
                    kinds, vis_index, step_j = grower.arrays()
                    mask = build_rollout_mask(
                        kinds, vis_index, step_j,
                        causal_within_thought=causal_within_thought,
                    )
                    read_slot = anchor_slot if j == 1 else grower.slot_of(anchor, j - 1)
                    hid = _feedback(weights, grower, mask)
                    n_forwards += 1
                    z = np.asarray(hid.data)[:, read_slot]
                    if rec is not None:
                        rec.round_reads.append(z.copy())
                    grower.append_thought_slot(KIND_LATENT, anchor, j, None, z)
            if variant == PAUSE_TOKENS or variant == LOOPED_UNSUPERVISED:
                decode_slots = [grower.slot_of(anchor, tau)]
            elif decode_mode == MULTI:
                decode_slots = [grower.slot_of(anchor, j) for j in range(1, tau + 1)]
            else:
                decode_slots = [grower.slot_of(anchor, 1)]
            if rec is not None:
                records.append(rec)
        else:
            decode_slots = [grower.length - 1]

        if grower.length + len(decode_slots) > cfg.max_positions:
            break
        kinds, vis_index, step_j = grower.arrays()
        if variant in LATENT_VARIANTS:
            mask = build_final_mask(
                kinds, vis_index, step_j, causal_within_thought=causal_within_thought
            )
        else:
            mask = plain_causal(grower.length)
        hid = _hidden_at(weights, grower, mask)
        n_forwards += 1
        hid_np = np.asarray(hid.data)
        if ran_thought and capture and records:
            records[-1].decode_hidden = hid_np[:, decode_slots[0]].copy()
        for s in decode_slots:
            tok = _argmax_tokens(weights, nc.tensor(hid_np[:, s : s + 1]))[:, 0]
            emit(tok)
            grower.append_visible(tok)
            if done.all() or max(len(o) for o in out) >= max_new:
                break

        pending_anchor = False
        if thoughts_left > 0 and not done.all():
            if strategy == SEQUENTIAL:
                pending_anchor = True
            else:
                pending_anchor = bool(rng.random() < trigger_prob)

    return GenerationResult(
        tokens=out, n_forwards=n_forwards, anchors=anchors_used, records=records
    )
