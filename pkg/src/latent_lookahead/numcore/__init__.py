"""Minimal dense-tensor numerics: tape autodiff, transformer kernels, Adam."""

from .losses import cross_entropy_masked
from .ops import (
    add,
    concat_rows,
    dropout,
    embedding_gather,
    gather_slots,
    gelu,
    layer_norm,
    masked_softmax_rows,
    matmul,
    mul,
    reshape,
    scale,
    scatter_slots,
    slice_rows,
    transpose_axes,
    transpose_last_two,
)
from .optim import AdamState, adam_state, adam_step, clip_global_norm, zero_grads
from .tensor import (
    NonFiniteError,
    Tape,
    Tensor,
    assert_finite,
    backward,
    default_dtype,
    deterministic,
    op_kinds,
    primitive_forward,
    set_default_dtype,
    set_deterministic,
    tensor,
)

__all__ = [
    "AdamState",
    "NonFiniteError",
    "Tape",
    "Tensor",
    "add",
    "adam_state",
    "adam_step",
    "assert_finite",
    "backward",
    "clip_global_norm",
    "concat_rows",
    "cross_entropy_masked",
    "default_dtype",
    "deterministic",
    "dropout",
    "embedding_gather",
    "gather_slots",
    "gelu",
    "layer_norm",
    "masked_softmax_rows",
    "matmul",
    "mul",
    "op_kinds",
    "primitive_forward",
    "reshape",
    "scale",
    "scatter_slots",
    "set_default_dtype",
    "set_deterministic",
    "slice_rows",
    "tensor",
    "transpose_axes",
    "transpose_last_two",
    "zero_grads",
]
