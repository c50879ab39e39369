"""Loss assembly per variant: an NTP channel plus an optional latent channel.

total = ntp + latent, exactly. The NTP channel averages cross entropy over all
supervised visible (and final-pause) slots; the latent channel averages over
all supervised thought-step predictions. Explicit denominators let a batch be
split into microbatches whose summed losses and gradients equal the full-batch
computation bit for bit up to addition order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from ..model import ModelWeights
from .layout import (
    BatchedLayout,
    LATENT_VARIANTS,
    MTP_AUX_HEADS,
)
from .unroll import UnrollResult


@dataclass
class LossBundle:
    total: nc.Tensor
    ntp: nc.Tensor
    latent: nc.Tensor | None
    ntp_count: int
    latent_count: int

    def scalars(self) -> tuple[float, float, float]:
        """(total, ntp, latent) as floats for logging."""
        lat = float(self.latent.data) if self.latent is not None else 0.0
        return float(self.total.data), float(self.ntp.data), lat


def mtp_anchor_slots(blayout: BatchedLayout) -> np.ndarray:
    """(B, K) slot indices of the anchors carrying auxiliary heads."""
    return np.stack(
        [[l.slot_of_visible[a] for a in l.schedule.anchors] for l in blayout.layouts]
    )


def mtp_step_targets(blayout: BatchedLayout, n_heads: int) -> tuple[np.ndarray, np.ndarray]:
    """Targets and validity for head j predicting tokens[anchor + j].

    Returns (targets, mask), each (n_heads, B, K)."""
    B = blayout.batch
    K = len(blayout.layouts[0].schedule.anchors)
    targets = np.zeros((n_heads, B, K), dtype=np.int64)
    mask = np.zeros((n_heads, B, K), dtype=bool)
    for b, l in enumerate(blayout.layouts):
        T = l.T
        for k, a in enumerate(l.schedule.anchors):
            for j in range(1, n_heads + 1):
                if a + j <= T - 1:
                    targets[j - 1, b, k] = l.tokens[a + j]
                    mask[j - 1, b, k] = True
    return targets, mask


def channel_counts(blayout: BatchedLayout, n_aux_heads: int = 0) -> tuple[int, int]:
    """(ntp_count, latent_count) of supervised predictions in each channel."""
    ntp = int(blayout.ntp_mask.sum())
    if blayout.variant == MTP_AUX_HEADS:
        _, mask = mtp_step_targets(blayout, n_aux_heads)
        return ntp, int(mask.sum())
    return ntp, int(blayout.latent_mask.sum())


def _flat_ce(logits: nc.Tensor, targets: np.ndarray, mask: np.ndarray, denom: float | None) -> nc.Tensor:
    V = logits.shape[-1]
    return nc.cross_entropy_masked(
        nc.reshape(logits, (-1, V)), targets.reshape(-1), mask.reshape(-1), denom=denom
    )


def compute_losses(
    weights: ModelWeights,
    blayout: BatchedLayout,
    result: UnrollResult,
    *,
    ntp_denom: float | None = None,
    latent_denom: float | None = None,
) -> LossBundle:
    """Both channels for one (micro)batch.

    ntp_denom / latent_denom override the per-channel averaging divisor; pass
    the whole-batch counts when accumulating over microbatches.
    """
    ntp = _flat_ce(result.logits, blayout.ntp_targets, blayout.ntp_mask, ntp_denom)
    ntp_count = int(blayout.ntp_mask.sum())

    variant = blayout.variant
    latent = None
    latent_count = 0
    if variant in LATENT_VARIANTS:
        latent_count = int(blayout.latent_mask.sum())
        if latent_count:
            latent = _flat_ce(
                result.logits, blayout.latent_targets, blayout.latent_mask, latent_denom
            )
    elif variant == MTP_AUX_HEADS:
        n_heads = weights.config.aux_heads
        targets, mask = mtp_step_targets(blayout, n_heads)
        latent_count = int(mask.sum())
        if latent_count:
            denom = latent_denom if latent_denom is not None else float(latent_count)
            anchors = mtp_anchor_slots(blayout)
            h = nc.gather_slots(result.hidden, anchors)
            terms = []
            for j in range(1, n_heads + 1):
                if mask[j - 1].any():
                    head_logits = nc.matmul(h, weights[f"aux_head.{j - 1}"])
                    terms.append(_flat_ce(head_logits, targets[j - 1], mask[j - 1], denom))
            latent = terms[0]
            for t in terms[1:]:
                latent = nc.add(latent, t)

    total = nc.add(ntp, latent) if latent is not None else ntp
    return LossBundle(total=total, ntp=ntp, latent=latent, ntp_count=ntp_count, latent_count=latent_count)
