"""Pre-norm decoder forward over mixed discrete/injected inputs.

Slots hold either a vocabulary token id or an injected continuous vector
(a fed-back hidden state); both get the learned absolute position embedding
of their slot added. Attention is fully mask-driven: causality and every
thought-isolation rule live in the mask argument, never in this module.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .. import numcore as nc
from .config import ModelConfig


@dataclass
class MixedInput:
    """One sequence of slots: token_ids (L,) with -1 at injected slots,
    positions (L,) into the learned position table, and injected (L, d_model)
    whose rows are read only where token_ids < 0."""

    token_ids: np.ndarray
    positions: np.ndarray
    injected: np.ndarray | None = None

    def __post_init__(self):
        self.token_ids = np.asarray(self.token_ids, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=np.int64)
        if self.token_ids.shape != self.positions.shape or self.token_ids.ndim != 1:
            raise ValueError("token_ids and positions must be equal-length 1-D arrays")
        if (self.token_ids < 0).any() and self.injected is None:
            raise ValueError("injected vectors required for slots with token_id < 0")

    def __len__(self) -> int:
        return int(self.token_ids.shape[0])


@dataclass
class BatchedInput:
    """Batch form used internally: ids (B, L) with 0 at injected slots,
    inject_flag (B, L) marking them, injected Tensor (B, L, d_model) carrying
    the vectors (zero rows elsewhere), positions (B, L)."""

    token_ids: np.ndarray
    positions: np.ndarray
    inject_flag: np.ndarray | None = None
    injected: nc.Tensor | None = None

    @classmethod
    def from_mixed(cls, mixed: MixedInput, d_model: int) -> "BatchedInput":
        ids = mixed.token_ids[None, :]
        pos = mixed.positions[None, :]
        if not (mixed.token_ids < 0).any():
            return cls(np.maximum(ids, 0), pos)
        flag = (ids < 0).astype(np.float64)
        inj = np.zeros((1, ids.shape[1], d_model))
        rows = np.where(mixed.token_ids < 0)[0]
        inj[0, rows] = np.asarray(mixed.injected)[rows]
        return cls(np.maximum(ids, 0), pos, flag, nc.tensor(inj))

    @property
    def batch(self) -> int:
        return int(self.token_ids.shape[0])

    @property
    def length(self) -> int:
        return int(self.token_ids.shape[1])


class ModelWeights:
    """Named parameter table plus its config."""

    def __init__(self, config: ModelConfig, params: dict[str, nc.Tensor]):
        self.config = config
        self.params = params

    def __getitem__(self, name: str) -> nc.Tensor:
        return self.params[name]

    def n_parameters(self) -> int:
        return sum(p.size for p in self.params.values())


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """The full named-parameter layout implied by a config."""
    d, v, p = config.d_model, config.vocab_size, config.max_positions
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (v, d),
        "pos_emb": (p, d),
    }
    for l in range(config.n_layers):
        pre = f"layers.{l}."
        shapes[pre + "ln1.gain"] = (d,)
        shapes[pre + "ln1.bias"] = (d,)
        for which in ("wq", "wk", "wv", "wo"):
            shapes[pre + "attn." + which] = (d, d)
        for which in ("bq", "bk", "bv", "bo"):
            shapes[pre + "attn." + which] = (d,)
        shapes[pre + "ln2.gain"] = (d,)
        shapes[pre + "ln2.bias"] = (d,)
        shapes[pre + "mlp.w1"] = (d, 4 * d)
        shapes[pre + "mlp.b1"] = (4 * d,)
        shapes[pre + "mlp.w2"] = (4 * d, d)
        shapes[pre + "mlp.b2"] = (d,)
    shapes["ln_f.gain"] = (d,)
    shapes["ln_f.bias"] = (d,)
    if not config.tie_embeddings:
        shapes["unembed"] = (d, v)
    for j in range(config.aux_heads):
        shapes[f"aux_head.{j}"] = (d, v)
    return shapes


def init_weights(config: ModelConfig, rng: np.random.Generator) -> ModelWeights:
    """Normal(0, 0.02) matrices; zero biases and norm shifts; unit norm gains."""
    params: dict[str, nc.Tensor] = {}
    for name, shape in parameter_shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "gain":
            data = np.ones(shape)
        elif leaf == "bias" or leaf.startswith("b"):
            data = np.zeros(shape)
        else:
            data = rng.normal(0.0, 0.02, size=shape)
        params[name] = nc.tensor(data, requires_grad=True)
    return ModelWeights(config, params)


_FORWARD_HOOKS: list = []


class ForwardCounter:
    """Counts forward passes; register via count_forwards()."""

    def __init__(self):
        self.count = 0
        self.lengths: list[int] = []

    def __call__(self, length: int) -> None:
        self.count += 1
        self.lengths.append(length)


@contextmanager
def count_forwards():
    counter = ForwardCounter()
    _FORWARD_HOOKS.append(counter)
    try:
        yield counter
    finally:
        _FORWARD_HOOKS.remove(counter)


def _normalize_mask(mask: np.ndarray, batch: int, length: int) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape[-2:] != (length, length):
        raise ValueError(f"mask trailing shape {mask.shape[-2:]} != ({length}, {length})")
    if mask.ndim == 2:
        return mask[None, None]
    if mask.ndim == 3:
        if mask.shape[0] not in (1, batch):
            raise ValueError(f"mask batch {mask.shape[0]} incompatible with {batch}")
        return mask[:, None]
    if mask.ndim == 4:
        return mask
    raise ValueError(f"mask must be 2-4 dimensional, got {mask.ndim}")


def _affine_norm(x: nc.Tensor, weights: ModelWeights, prefix: str) -> nc.Tensor:
    y = nc.layer_norm(x)
    return nc.add(nc.mul(y, weights[prefix + ".gain"]), weights[prefix + ".bias"])


def forward(
    weights: ModelWeights,
    inp: MixedInput | BatchedInput,
    mask: np.ndarray,
    *,
    training: bool = False,
    rng: np.random.Generator | None = None,
    return_pre_norm: bool = False,
):
    """Hidden states (B, L, d_model) after the final layer norm.

    mask[..., q, k] == True lets slot q attend slot k. With return_pre_norm,
    returns (post_norm, pre_norm) so callers can pick the feedback source.
    """
    cfg = weights.config
    if isinstance(inp, MixedInput):
        inp = BatchedInput.from_mixed(inp, cfg.d_model)
    B, L = inp.token_ids.shape
    if inp.positions.max() >= cfg.max_positions:
        raise ValueError(
            f"position index {int(inp.positions.max())} >= max_positions {cfg.max_positions}"
        )
    mask4 = _normalize_mask(mask, B, L)
    for hook in _FORWARD_HOOKS:
        hook(L)

    tok = nc.embedding_gather(weights["tok_emb"], inp.token_ids)
    if inp.injected is not None:
        keep = nc.tensor((1.0 - inp.inject_flag)[..., None])
        tok = nc.add(nc.mul(tok, keep), inp.injected)
    pos = nc.embedding_gather(weights["pos_emb"], inp.positions)
    x = nc.add(tok, pos)
    x = nc.dropout(x, cfg.dropout, rng=rng, training=training)

    H, hd = cfg.n_heads, cfg.head_dim
    att_scale = 1.0 / np.sqrt(hd)
    for l in range(cfg.n_layers):
        pre = f"layers.{l}."
        h = _affine_norm(x, weights, pre + "ln1")
        q = nc.add(nc.matmul(h, weights[pre + "attn.wq"]), weights[pre + "attn.bq"])
        k = nc.add(nc.matmul(h, weights[pre + "attn.wk"]), weights[pre + "attn.bk"])
        v = nc.add(nc.matmul(h, weights[pre + "attn.wv"]), weights[pre + "attn.bv"])
        qh = nc.transpose_axes(nc.reshape(q, (B, L, H, hd)), (0, 2, 1, 3))
        kh = nc.transpose_axes(nc.reshape(k, (B, L, H, hd)), (0, 2, 1, 3))
        vh = nc.transpose_axes(nc.reshape(v, (B, L, H, hd)), (0, 2, 1, 3))
        scores = nc.scale(nc.matmul(qh, nc.transpose_last_two(kh)), att_scale)
        probs = nc.masked_softmax_rows(scores, mask4)
        probs = nc.dropout(probs, cfg.dropout, rng=rng, training=training)
        ctx = nc.matmul(probs, vh)
        ctx = nc.reshape(nc.transpose_axes(ctx, (0, 2, 1, 3)), (B, L, cfg.d_model))
        att_out = nc.add(nc.matmul(ctx, weights[pre + "attn.wo"]), weights[pre + "attn.bo"])
        att_out = nc.dropout(att_out, cfg.dropout, rng=rng, training=training)
        x = nc.add(x, att_out)

        h2 = _affine_norm(x, weights, pre + "ln2")
        m = nc.add(nc.matmul(h2, weights[pre + "mlp.w1"]), weights[pre + "mlp.b1"])
        m = nc.gelu(m)
        m = nc.add(nc.matmul(m, weights[pre + "mlp.w2"]), weights[pre + "mlp.b2"])
        m = nc.dropout(m, cfg.dropout, rng=rng, training=training)
        x = nc.add(x, m)

    post = _affine_norm(x, weights, "ln_f")
    if return_pre_norm:
        return post, x
    return post


def unembed(weights: ModelWeights, hidden: nc.Tensor) -> nc.Tensor:
    """Logits (B, L, vocab); no softmax, no bias."""
    if weights.config.tie_embeddings:
        return nc.matmul(hidden, nc.transpose_last_two(weights["tok_emb"]))
    return nc.matmul(hidden, weights["unembed"])


def feedback_hidden(weights: ModelWeights, inp, mask, **kw) -> nc.Tensor:
    """The hidden states used for latent re-injection, honoring feedback_pre_norm."""
    post, pre = forward(weights, inp, mask, return_pre_norm=True, **kw)
    return pre if weights.config.feedback_pre_norm else post
