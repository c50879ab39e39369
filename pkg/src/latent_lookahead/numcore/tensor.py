"""Dense-tensor core: Tensor values, the gradient tape, and the backward driver.

Arrays are numpy; every differentiable kernel is registered here by name and
dispatched through ``primitive_forward`` so the tape sees one node per call.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

_DEFAULT_DTYPE = np.float32
_DETERMINISTIC = False


def set_default_dtype(dtype) -> None:
    """Select float32 (training) or float64 (gradient-check mode) for new tensors."""
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"unsupported dtype {dtype}")
    _DEFAULT_DTYPE = dtype.type


def default_dtype():
    return _DEFAULT_DTYPE


def set_deterministic(flag: bool) -> None:
    """Route context-axis reductions through order-stable (non-BLAS) paths.

    Needed for bit-identical results across layouts that differ only by
    masked-out slots: sequential accumulation is invariant to interleaved
    zero terms, pairwise/BLAS accumulation is not.
    """
    global _DETERMINISTIC
    _DETERMINISTIC = bool(flag)


def deterministic() -> bool:
    return _DETERMINISTIC


class NonFiniteError(RuntimeError):
    """Raised when a loss or gradient stops being finite; carries a dump string."""


def assert_finite(what: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        finite = arr[np.isfinite(arr)]
        lo = float(finite.min()) if finite.size else float("nan")
        hi = float(finite.max()) if finite.size else float("nan")
        raise NonFiniteError(
            f"non-finite values in {what}: {bad}/{arr.size} entries, "
            f"finite range [{lo:.3e}, {hi:.3e}], shape {arr.shape}"
        )


class Tensor:
    """A dense array with an optional gradient buffer.

    data: numpy array (any shape, float dtype for differentiable values)
    requires_grad: participate in the tape
    grad: accumulated gradient of the loss w.r.t. data, same shape
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


def tensor(data, requires_grad: bool = False) -> Tensor:
    """Wrap data as a Tensor, casting floats to the default dtype."""
    arr = np.asarray(data)
    if np.issubdtype(arr.dtype, np.floating) and arr.dtype != _DEFAULT_DTYPE:
        arr = arr.astype(_DEFAULT_DTYPE)
    return Tensor(arr, requires_grad)


class TapeNode:
    """One recorded kernel application.

    out: the produced Tensor
    inputs: the Tensor operands, in kernel order
    saved: whatever the kernel's backward needs (arrays, scalars)
    backward_fn: maps (grad_out, saved) -> tuple of grads aligned with inputs
                 (None for operands that need no gradient)
    """

    __slots__ = ("op_kind", "out", "inputs", "saved", "backward_fn")

    def __init__(self, op_kind, out, inputs, saved, backward_fn):
        self.op_kind = op_kind
        self.out = out
        self.inputs = inputs
        self.saved = saved
        self.backward_fn = backward_fn


class Tape:
    """Topologically ordered record of kernel applications.

    Nodes are appended in execution order, which is a valid topological order
    of the data-flow graph; backward walks the list once in reverse.
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _TAPE_STACK.pop()

    def __len__(self) -> int:
        return len(self.nodes)


_TAPE_STACK: list[Tape] = []


def active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


# op_kind -> (forward, make_backward); forward returns (out_array, saved)
_OP_REGISTRY: dict[str, tuple[Callable, Callable]] = {}


def register_op(op_kind: str, forward: Callable, backward: Callable) -> None:
    if op_kind in _OP_REGISTRY:
        raise ValueError(f"op {op_kind!r} registered twice")
    _OP_REGISTRY[op_kind] = (forward, backward)


def op_kinds() -> tuple[str, ...]:
    return tuple(sorted(_OP_REGISTRY))


def primitive_forward(op_kind: str, inputs: list[Tensor] | tuple[Tensor, ...], **attrs) -> Tensor:
    """Apply a registered kernel and record a tape node if gradients are wanted.

    The output requires grad iff some input does and a tape is active.
    """
    if op_kind not in _OP_REGISTRY:
        raise KeyError(f"unknown op kind {op_kind!r}; known: {op_kinds()}")
    forward, backward = _OP_REGISTRY[op_kind]
    inputs = tuple(inputs)
    arrays = tuple(t.data for t in inputs)
    out_arr, saved = forward(arrays, attrs)
    tape = active_tape()
    needs = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(out_arr, requires_grad=needs)
    if needs:
        tape.nodes.append(TapeNode(op_kind, out, inputs, (saved, attrs), backward))
    return out


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(leaf) into .grad for every requires_grad leaf.

    Visits each tape node exactly once, newest first. Intermediate gradients
    live in a scratch table keyed by id and are freed as soon as their
    producing node has been processed.
    """
    if loss.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    assert_finite("loss", loss.data)
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    produced = {id(node.out) for node in tape.nodes}
    for node in reversed(tape.nodes):
        g_out = grads.pop(id(node.out), None)
        if g_out is None:
            continue
        saved, attrs = node.saved
        in_grads = node.backward_fn(g_out, saved, attrs)
        for t, g in zip(node.inputs, in_grads):
            if g is None or not t.requires_grad:
                continue
            if id(t) in produced:
                acc = grads.get(id(t))
                grads[id(t)] = g if acc is None else acc + g
            else:
                t.grad = g.copy() if t.grad is None else t.grad + g
        node.saved = None


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape`, undoing numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def seq_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matmul with strictly sequential accumulation over the contracted axis."""
    return np.einsum("...ij,...jk->...ik", a, b, optimize=False)


def seq_row_sum(a: np.ndarray) -> np.ndarray:
    """Last-axis sum with strictly sequential accumulation."""
    ones = np.ones(a.shape[-1], dtype=a.dtype)
    return np.einsum("...k,k->...", a, ones, optimize=False)
