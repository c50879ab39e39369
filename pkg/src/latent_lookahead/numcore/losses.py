"""Masked cross-entropy over flattened prediction slots."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, deterministic, primitive_forward, register_op, seq_row_sum


def _cross_entropy_masked_fwd(arrays, attrs):
    (logits,) = arrays
    targets = attrs["targets"]
    mask = attrs["mask"]
    if logits.ndim != 2:
        raise ValueError(f"cross_entropy_masked expects (N, V) logits, got {logits.shape}")
    count = int(mask.sum())
    if count == 0:
        raise ValueError("cross_entropy_masked: every position is masked out")
    denom = attrs.get("denom") or float(count)
    rowmax = logits.max(axis=-1, keepdims=True)
    exps = np.exp(logits - rowmax)
    if deterministic():
        sumexp = seq_row_sum(exps)[..., None]
    else:
        sumexp = exps.sum(axis=-1, keepdims=True)
    lse = rowmax + np.log(sumexp)
    rows = np.arange(logits.shape[0])
    safe_t = np.where(mask, targets, 0)
    nll = lse[:, 0] - logits[rows, safe_t]
    if deterministic():
        total = seq_row_sum((nll * mask).astype(logits.dtype))
    else:
        total = (nll * mask).sum()
    loss = np.asarray(total / denom, dtype=logits.dtype)
    return loss, (logits, lse, safe_t, mask, denom)


def _cross_entropy_masked_bwd(g, saved, attrs):
    logits, lse, safe_t, mask, denom = saved
    probs = np.exp(logits - lse)
    rows = np.arange(logits.shape[0])
    probs[rows, safe_t] -= 1.0
    factor = (mask.astype(logits.dtype) / logits.dtype.type(denom))[:, None]
    probs *= factor
    return (probs * g,)


register_op("cross_entropy_masked", _cross_entropy_masked_fwd, _cross_entropy_masked_bwd)


def cross_entropy_masked(
    logits: Tensor,
    targets: np.ndarray,
    mask: np.ndarray,
    denom: float | None = None,
) -> Tensor:
    """Mean negative log-likelihood over unmasked positions.

    logits (N, V); targets (N,) int; mask (N,) bool selects supervised rows.
    denom overrides the divisor (default: number of unmasked rows), which lets
    microbatch losses accumulate to an exact full-batch mean.
    """
    return primitive_forward(
        "cross_entropy_masked",
        (logits,),
        targets=np.asarray(targets),
        mask=np.asarray(mask, dtype=bool),
        denom=denom,
    )
