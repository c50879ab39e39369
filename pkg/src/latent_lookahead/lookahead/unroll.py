"""Training-time unroll: tau rollout forwards plus one final supervised forward.

The latent grid is allocated at full expanded size up front. Round j forwards
the prefix ending at the highest slot it needs to read, under the rollout mask
with rounds 1..j-1 marked present; the hidden read for thought i moves from the
anchor slot (round 1) to the previous round's slot (later rounds), and the
result is scattered into the grid without detaching, so gradients flow through
every round. Because a latent slot attends only visibles up to its anchor and
its own thought, each thought's rollout computes exactly what it would if run
alone; the parallel unroll therefore matches one-thought-at-a-time generation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..model import BatchedInput, ModelWeights, feedback_hidden, forward, unembed
from .layout import BatchedLayout, KIND_VISIBLE, LATENT_VARIANTS
from .masking import batch_final_masks, batch_rollout_masks


@dataclass
class UnrollResult:
    """Final-pass activations plus what the rounds produced."""

    hidden: nc.Tensor
    logits: nc.Tensor
    injected: nc.Tensor | None
    n_forwards: int
    round_reads: list[nc.Tensor] | None
    round_hiddens: list[np.ndarray] | None = None


def unroll_train(
    weights: ModelWeights,
    blayout: BatchedLayout,
    *,
    training: bool = False,
    rng: np.random.Generator | None = None,
    causal_within_thought: bool = False,
    capture_rounds: bool = False,
) -> UnrollResult:
    """Run the variant's full forward pass over a batched layout.

    Latent variants cost tau+1 transformer forwards; every other variant is a
    single plain-causal forward over its (possibly pause-expanded) slots.
    """
    cfg = weights.config
    if blayout.variant not in LATENT_VARIANTS:
        mask = batch_final_masks(blayout)
        inp = BatchedInput(blayout.slot_tokens, blayout.positions)
        post = forward(weights, inp, mask, training=training, rng=rng)
        return UnrollResult(
            hidden=post,
            logits=unembed(weights, post),
            injected=None,
            n_forwards=1,
            round_reads=None,
        )

    B, L, tau = blayout.batch, blayout.length, blayout.tau
    ids = np.maximum(blayout.slot_tokens, 0)
    flag = (blayout.kinds != KIND_VISIBLE).astype(np.float64)
    injected = nc.tensor(np.zeros((B, L, cfg.d_model)))
    reads: list[nc.Tensor] | None = [] if capture_rounds else None
    grids: list[np.ndarray] | None = [] if capture_rounds else None

    for j in range(1, tau + 1):
        read_slots = blayout.anchor_slots if j == 1 else blayout.inject_slots[j - 2]
        cut = int(read_slots.max()) + 1
        mask = batch_rollout_masks(
            blayout, present_rounds=j - 1, causal_within_thought=causal_within_thought
        )[..., :cut, :cut]
        inp = BatchedInput(
            ids[:, :cut],
            blayout.positions[:, :cut],
            flag[:, :cut],
            nc.slice_rows(injected, 0, cut),
        )
        h = feedback_hidden(weights, inp, mask, training=training, rng=rng)
        z = nc.gather_slots(h, read_slots)
        if reads is not None:
            reads.append(z)
        if grids is not None:
            grids.append(h.data.copy())
        injected = nc.scatter_slots(injected, blayout.inject_slots[j - 1], z)

    final_mask = batch_final_masks(blayout, causal_within_thought=causal_within_thought)
    inp = BatchedInput(ids, blayout.positions, flag, injected)
    post = forward(weights, inp, final_mask, training=training, rng=rng)
    return UnrollResult(
        hidden=post,
        logits=unembed(weights, post),
        injected=injected,
        n_forwards=tau + 1,
        round_reads=reads,
        round_hiddens=grids,
    )
