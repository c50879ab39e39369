"""Kernel set: forward/backward pairs registered on the tape.

Shapes use trailing-axis conventions: matmul contracts the last axis of the
first operand with the second-to-last of the second, rows means axis -2,
features/vocab means axis -1.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    Tensor,
    deterministic,
    primitive_forward,
    register_op,
    seq_matmul,
    seq_row_sum,
    unbroadcast,
)

_GELU_K0 = 0.7978845608028654  # sqrt(2/pi)
_GELU_K1 = 0.044715


def _matmul_fwd(arrays, attrs):
    a, b = arrays
    out = seq_matmul(a, b) if deterministic() else a @ b
    return out, (a, b)


def _matmul_bwd(g, saved, attrs):
    a, b = saved
    mm = seq_matmul if deterministic() else np.matmul
    ga = mm(g, b.swapaxes(-1, -2))
    gb = mm(a.swapaxes(-1, -2), g)
    return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)


def _add_fwd(arrays, attrs):
    a, b = arrays
    return a + b, (a.shape, b.shape)


def _add_bwd(g, saved, attrs):
    sa, sb = saved
    return unbroadcast(g, sa), unbroadcast(g, sb)


def _mul_fwd(arrays, attrs):
    a, b = arrays
    return a * b, (a, b)


def _mul_bwd(g, saved, attrs):
    a, b = saved
    return unbroadcast(g * b, a.shape), unbroadcast(g * a, b.shape)


def _scale_fwd(arrays, attrs):
    (x,) = arrays
    return x * x.dtype.type(attrs["c"]), None


def _scale_bwd(g, saved, attrs):
    return (g * g.dtype.type(attrs["c"]),)


def _transpose_last_two_fwd(arrays, attrs):
    (x,) = arrays
    return x.swapaxes(-1, -2), None


def _transpose_last_two_bwd(g, saved, attrs):
    return (g.swapaxes(-1, -2),)


def _transpose_axes_fwd(arrays, attrs):
    (x,) = arrays
    return np.transpose(x, attrs["axes"]), None


def _transpose_axes_bwd(g, saved, attrs):
    inv = np.argsort(attrs["axes"])
    return (np.transpose(g, inv),)


def _reshape_fwd(arrays, attrs):
    (x,) = arrays
    return x.reshape(attrs["shape"]), x.shape


def _reshape_bwd(g, saved, attrs):
    return (g.reshape(saved),)


def _gelu_fwd(arrays, attrs):
    (x,) = arrays
    t = np.tanh(_GELU_K0 * (x + _GELU_K1 * x * x * x))
    return 0.5 * x * (1.0 + t), (x,)


def _gelu_bwd(g, saved, attrs):
    (x,) = saved
    t = np.tanh(_GELU_K0 * (x + _GELU_K1 * x * x * x))
    dt = (1.0 - t * t) * _GELU_K0 * (1.0 + 3.0 * _GELU_K1 * x * x)
    return (g * (0.5 * (1.0 + t) + 0.5 * x * dt),)


def _layer_norm_fwd(arrays, attrs):
    (x,) = arrays
    eps = attrs.get("eps", 1e-5)
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    y = xc * rstd
    return y, (y, rstd)


def _layer_norm_bwd(g, saved, attrs):
    y, rstd = saved
    gm = g.mean(axis=-1, keepdims=True)
    gym = (g * y).mean(axis=-1, keepdims=True)
    return (rstd * (g - gm - y * gym),)


def _masked_softmax_rows_fwd(arrays, attrs):
    (logits,) = arrays
    mask = attrs["mask"]
    m = np.broadcast_to(mask, logits.shape)
    if not m.any(axis=-1).all():
        raise ValueError("masked_softmax_rows: a row has no allowed entries")
    neg = np.where(m, logits, -np.inf)
    rowmax = neg.max(axis=-1, keepdims=True)
    exps = np.exp(neg - rowmax)
    # exp(-inf) is exactly 0, so masked entries add nothing to the row sum
    if deterministic():
        denom = seq_row_sum(exps)[..., None]
    else:
        denom = exps.sum(axis=-1, keepdims=True)
    probs = exps / denom
    return probs, (probs,)


def _masked_softmax_rows_bwd(g, saved, attrs):
    (probs,) = saved
    gp = g * probs
    if deterministic():
        inner = seq_row_sum(gp)[..., None]
    else:
        inner = gp.sum(axis=-1, keepdims=True)
    return (gp - probs * inner,)


def _embedding_gather_fwd(arrays, attrs):
    (table,) = arrays
    return table[attrs["ids"]], (table.shape, table.dtype)


def _embedding_gather_bwd(g, saved, attrs):
    shape, dtype = saved
    gt = np.zeros(shape, dtype=dtype)
    np.add.at(gt, attrs["ids"], g)
    return (gt,)


def _concat_rows_fwd(arrays, attrs):
    return np.concatenate(arrays, axis=-2), tuple(a.shape[-2] for a in arrays)


def _concat_rows_bwd(g, saved, attrs):
    splits = np.cumsum(saved[:-1])
    return tuple(np.split(g, splits, axis=-2))


def _slice_rows_fwd(arrays, attrs):
    (x,) = arrays
    return x[..., attrs["start"] : attrs["stop"], :], x.shape


def _slice_rows_bwd(g, saved, attrs):
    gx = np.zeros(saved, dtype=g.dtype)
    gx[..., attrs["start"] : attrs["stop"], :] = g
    return (gx,)


def _dropout_fwd(arrays, attrs):
    (x,) = arrays
    p = attrs["p"]
    if not attrs.get("training", False) or p <= 0.0:
        return x, None
    keep = attrs["rng"].random(x.shape) >= p
    inv = x.dtype.type(1.0 / (1.0 - p))
    return x * keep * inv, (keep, inv)


def _dropout_bwd(g, saved, attrs):
    if saved is None:
        return (g,)
    keep, inv = saved
    return (g * keep * inv,)


def _gather_slots_fwd(arrays, attrs):
    (x,) = arrays
    idx = attrs["idx"]
    b = np.arange(x.shape[0])[:, None]
    return x[b, idx], x.shape


def _gather_slots_bwd(g, saved, attrs):
    idx = attrs["idx"]
    gx = np.zeros(saved, dtype=g.dtype)
    b = np.arange(saved[0])[:, None]
    np.add.at(gx, (b, idx), g)
    return (gx,)


def _scatter_slots_fwd(arrays, attrs):
    base, vals = arrays
    idx = attrs["idx"]  # (B, K), unique within each row
    out = base.copy()
    b = np.arange(base.shape[0])[:, None]
    out[b, idx] = vals
    return out, None


def _scatter_slots_bwd(g, saved, attrs):
    idx = attrs["idx"]
    b = np.arange(g.shape[0])[:, None]
    g_vals = g[b, idx]
    g_base = g.copy()
    g_base[b, idx] = 0.0
    return g_base, g_vals


register_op("matmul", _matmul_fwd, _matmul_bwd)
register_op("add", _add_fwd, _add_bwd)
register_op("mul", _mul_fwd, _mul_bwd)
register_op("scale", _scale_fwd, _scale_bwd)
register_op("transpose_last_two", _transpose_last_two_fwd, _transpose_last_two_bwd)
register_op("transpose_axes", _transpose_axes_fwd, _transpose_axes_bwd)
register_op("reshape", _reshape_fwd, _reshape_bwd)
register_op("gelu", _gelu_fwd, _gelu_bwd)
register_op("layer_norm", _layer_norm_fwd, _layer_norm_bwd)
register_op("masked_softmax_rows", _masked_softmax_rows_fwd, _masked_softmax_rows_bwd)
register_op("embedding_gather", _embedding_gather_fwd, _embedding_gather_bwd)
register_op("concat_rows", _concat_rows_fwd, _concat_rows_bwd)
register_op("slice_rows", _slice_rows_fwd, _slice_rows_bwd)
register_op("dropout", _dropout_fwd, _dropout_bwd)
register_op("gather_slots", _gather_slots_fwd, _gather_slots_bwd)
register_op("scatter_slots", _scatter_slots_fwd, _scatter_slots_bwd)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return primitive_forward("matmul", (a, b))


def add(a: Tensor, b: Tensor) -> Tensor:
    return primitive_forward("add", (a, b))


def mul(a: Tensor, b: Tensor) -> Tensor:
    return primitive_forward("mul", (a, b))


def scale(x: Tensor, c: float) -> Tensor:
    return primitive_forward("scale", (x,), c=c)


def transpose_last_two(x: Tensor) -> Tensor:
    return primitive_forward("transpose_last_two", (x,))


def transpose_axes(x: Tensor, axes: tuple[int, ...]) -> Tensor:
    return primitive_forward("transpose_axes", (x,), axes=tuple(axes))


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    return primitive_forward("reshape", (x,), shape=tuple(shape))


def gelu(x: Tensor) -> Tensor:
    return primitive_forward("gelu", (x,))


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance; affine is separate."""
    return primitive_forward("layer_norm", (x,), eps=eps)


def masked_softmax_rows(logits: Tensor, mask: np.ndarray) -> Tensor:
    """Row-wise softmax over allowed entries; masked entries get probability 0."""
    return primitive_forward("masked_softmax_rows", (logits,), mask=np.asarray(mask, dtype=bool))


def embedding_gather(table: Tensor, ids: np.ndarray) -> Tensor:
    return primitive_forward("embedding_gather", (table,), ids=np.asarray(ids))


def concat_rows(*xs: Tensor) -> Tensor:
    return primitive_forward("concat_rows", xs)


def slice_rows(x: Tensor, start: int, stop: int) -> Tensor:
    return primitive_forward("slice_rows", (x,), start=int(start), stop=int(stop))


def dropout(x: Tensor, p: float, rng: np.random.Generator | None = None, training: bool = False) -> Tensor:
    if training and p > 0.0 and rng is None:
        raise ValueError("dropout in training mode needs an rng")
    return primitive_forward("dropout", (x,), p=float(p), rng=rng, training=training)


def gather_slots(x: Tensor, idx: np.ndarray) -> Tensor:
    """x (B, L, D), idx (B, K) -> (B, K, D)."""
    return primitive_forward("gather_slots", (x,), idx=np.asarray(idx))


def scatter_slots(base: Tensor, idx: np.ndarray, vals: Tensor) -> Tensor:
    """Copy of base (B, L, D) with rows at idx (B, K) replaced by vals (B, K, D)."""
    return primitive_forward("scatter_slots", (base, vals), idx=np.asarray(idx))
