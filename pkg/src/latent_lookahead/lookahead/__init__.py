"""Thought schedules, expanded layouts, masks, the training unroll, losses,
and generation."""

from .generate import (
    DECODE_MODES,
    MULTI,
    SINGLE,
    GenerationResult,
    ThoughtRecord,
    generate,
)
from .layout import (
    KIND_LATENT,
    KIND_PAUSE,
    KIND_VISIBLE,
    LATENT_LOOKAHEAD,
    LATENT_VARIANTS,
    LOOPED_UNSUPERVISED,
    MTP_AUX_HEADS,
    NTP_BASELINE,
    PAUSE_TOKENS,
    PLAIN_VARIANTS,
    VARIANTS,
    BatchedLayout,
    ExpandedLayout,
    build_layout,
    make_pause_layout,
    pad_layout,
    stack_layouts,
)
from .losses import LossBundle, channel_counts, compute_losses, mtp_anchor_slots, mtp_step_targets
from .masking import (
    batch_final_masks,
    batch_rollout_masks,
    build_final_mask,
    build_mask,
    build_rollout_mask,
    plain_causal,
    render_mask,
    slot_labels,
)
from .schedule import RANDOM, SEQUENTIAL, STRATEGIES, ThoughtSchedule, select_positions
from .unroll import UnrollResult, unroll_train

__all__ = [
    "DECODE_MODES",
    "MULTI",
    "SINGLE",
    "GenerationResult",
    "ThoughtRecord",
    "generate",
    "KIND_LATENT",
    "KIND_PAUSE",
    "KIND_VISIBLE",
    "LATENT_LOOKAHEAD",
    "LATENT_VARIANTS",
    "LOOPED_UNSUPERVISED",
    "MTP_AUX_HEADS",
    "NTP_BASELINE",
    "PAUSE_TOKENS",
    "PLAIN_VARIANTS",
    "VARIANTS",
    "BatchedLayout",
    "ExpandedLayout",
    "build_layout",
    "make_pause_layout",
    "pad_layout",
    "stack_layouts",
    "LossBundle",
    "channel_counts",
    "compute_losses",
    "mtp_anchor_slots",
    "mtp_step_targets",
    "batch_final_masks",
    "batch_rollout_masks",
    "build_final_mask",
    "build_mask",
    "build_rollout_mask",
    "plain_causal",
    "render_mask",
    "slot_labels",
    "RANDOM",
    "SEQUENTIAL",
    "STRATEGIES",
    "ThoughtSchedule",
    "select_positions",
    "UnrollResult",
    "unroll_train",
]
