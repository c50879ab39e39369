"""Attention masks for expanded layouts.

Two phases share one rule set:

final/decode phase (all thoughts complete):
  visible -> visible   causal in expanded order
  visible -> latent    only if the latent's whole thought precedes the visible
  latent  -> visible   only up to the thought's anchor
  latent  -> latent    bidirectional within a thought, never across thoughts
  diagonal             always allowed

rollout phase (mid-generation, no thought complete yet): identical except
visible -> latent is off entirely, which is the "whole thought precedes"
rule evaluated while every thought is still partial. This is what makes the
parallel unroll equal one-thought-at-a-time generation and keeps training
and inference computations identical.
"""

from __future__ import annotations

import numpy as np

from .layout import (
    BatchedLayout,
    ExpandedLayout,
    KIND_PAUSE,
    KIND_VISIBLE,
    LATENT_VARIANTS,
)


def plain_causal(L: int) -> np.ndarray:
    return np.tril(np.ones((L, L), dtype=bool))


def _rule_mask(
    kinds: np.ndarray,
    vis_index: np.ndarray,
    step_j: np.ndarray,
    *,
    rollout: bool,
    present_rounds: int | None,
    causal_within_thought: bool,
) -> np.ndarray:
    L = len(kinds)
    vis = kinds == KIND_VISIBLE
    lat = ~vis
    idx = np.arange(L)
    vq, vk = vis[:, None], vis[None, :]
    lq, lk = lat[:, None], lat[None, :]
    anchor_q, anchor_k = vis_index[:, None], vis_index[None, :]
    step_q, step_k = step_j[:, None], step_j[None, :]

    vv = vq & vk & (idx[None, :] <= idx[:, None])
    lv = lq & vk & (anchor_k <= anchor_q)
    ll = lq & lk & (anchor_q == anchor_k)
    if causal_within_thought:
        ll &= step_k <= step_q
    allowed = vv | lv | ll
    if not rollout:
        # a whole thought precedes a visible iff its anchor is strictly earlier
        allowed |= vq & lk & (anchor_k < anchor_q)
    if present_rounds is not None:
        present = vis | (lat & (step_j <= present_rounds))
        allowed &= present[:, None] & present[None, :]
    allowed |= np.eye(L, dtype=bool)
    return allowed


def build_final_mask(
    kinds: np.ndarray,
    vis_index: np.ndarray,
    step_j: np.ndarray,
    *,
    causal_within_thought: bool = False,
) -> np.ndarray:
    """Final/decode-phase mask over raw slot arrays."""
    return _rule_mask(
        kinds,
        vis_index,
        step_j,
        rollout=False,
        present_rounds=None,
        causal_within_thought=causal_within_thought,
    )


def build_mask(layout: ExpandedLayout, *, causal_within_thought: bool = False) -> np.ndarray:
    """Final/decode-phase mask for one layout (plain causal for discrete variants)."""
    if layout.variant not in LATENT_VARIANTS:
        return plain_causal(layout.length)
    return build_final_mask(
        layout.kinds,
        layout.vis_index,
        layout.step_j,
        causal_within_thought=causal_within_thought,
    )


def build_rollout_mask(
    kinds: np.ndarray,
    vis_index: np.ndarray,
    step_j: np.ndarray,
    *,
    present_rounds: int | None = None,
    causal_within_thought: bool = False,
) -> np.ndarray:
    """Rollout-phase mask over slot arrays.

    present_rounds=r marks latent slots with step_j > r absent (training rounds
    run on a fixed full-size grid); None means every physical slot is present
    (inference, where the context only contains slots that exist).
    """
    return _rule_mask(
        kinds,
        vis_index,
        step_j,
        rollout=True,
        present_rounds=present_rounds,
        causal_within_thought=causal_within_thought,
    )


def batch_final_masks(blayout: BatchedLayout, *, causal_within_thought: bool = False) -> np.ndarray:
    """(B, 1, L, L) final masks, collapsed to (1, 1, L, L) when structure is shared."""
    if blayout.shared:
        return build_mask(blayout.layouts[0], causal_within_thought=causal_within_thought)[None, None]
    return np.stack(
        [build_mask(l, causal_within_thought=causal_within_thought) for l in blayout.layouts]
    )[:, None]


def batch_rollout_masks(
    blayout: BatchedLayout,
    present_rounds: int,
    *,
    causal_within_thought: bool = False,
) -> np.ndarray:
    """(B or 1, 1, L, L) rollout masks at a given number of present rounds."""
    source = blayout.layouts[:1] if blayout.shared else blayout.layouts
    masks = np.stack(
        [
            build_rollout_mask(
                l.kinds,
                l.vis_index,
                l.step_j,
                present_rounds=present_rounds,
                causal_within_thought=causal_within_thought,
            )
            for l in source
        ]
    )
    return masks[:, None]


def slot_labels(layout: ExpandedLayout) -> list[str]:
    labels = []
    for s in range(layout.length):
        if layout.kinds[s] == KIND_VISIBLE:
            labels.append(f"V{layout.vis_index[s]}")
        else:
            tag = "P" if layout.kinds[s] == KIND_PAUSE else "T"
            labels.append(f"{tag}{layout.vis_index[s]}.{layout.step_j[s]}")
    return labels


def render_mask(layout: ExpandedLayout, mask: np.ndarray | None = None) -> str:
    """ASCII grid: one row per query slot, '#' where attention is allowed."""
    if mask is None:
        mask = build_mask(layout)
    labels = slot_labels(layout)
    width = max(len(lbl) for lbl in labels)
    lines = [f"{'':>{width}}  " + " ".join(f"{i % 10}" for i in range(layout.length))]
    for q in range(layout.length):
        row = " ".join("#" if mask[q, k] else "." for k in range(layout.length))
        lines.append(f"{labels[q]:>{width}}  {row}")
    return "\n".join(lines)
