"""Shared test utilities: finite-difference oracles and scalarization."""

from __future__ import annotations

import numpy as np

from latent_lookahead import numcore as nc


def scalarize(t: nc.Tensor, weights: np.ndarray | None = None) -> tuple[nc.Tensor, np.ndarray]:
    """Reduce any tensor to a scalar loss sum(t * w) using only tape ops.

    Returns (scalar tensor, the weight array used), so finite differences can
    replay the same reduction.
    """
    n = t.size
    if weights is None:
        weights = np.linspace(0.5, 1.5, n).reshape(-1, 1)
    w = nc.tensor(weights.astype(t.data.dtype))
    flat = nc.reshape(t, (1, n))
    out = nc.matmul(flat, w)
    return nc.reshape(out, ()), weights


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """Max relative error with denominator max(1e-8, |a| + |b|)."""
    denom = np.maximum(1e-8, np.abs(a) + np.abs(b))
    return float(np.max(np.abs(a - b) / denom))


def finite_difference_grad(f, arr: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar-valued f at arr, element by element."""
    g = np.zeros_like(arr, dtype=np.float64)
    flat = arr.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        up = f()
        flat[i] = keep - eps
        down = f()
        flat[i] = keep
        gf[i] = (up - down) / (2.0 * eps)
    return g


def check_grads_fd(build_loss, tensors: dict[str, nc.Tensor], eps: float = 1e-6, tol: float = 1e-6) -> None:
    """Compare tape gradients of build_loss() against central differences.

    build_loss must recompute the scalar loss from the live tensor data each
    call. Run under float64 for the tolerances to be meaningful.
    """
    for t in tensors.values():
        t.grad = None
    with nc.Tape() as tape:
        loss = build_loss()
    nc.backward(loss, tape)
    for name, t in tensors.items():
        fd = finite_difference_grad(lambda: float(build_loss().data), t.data, eps=eps)
        got = t.grad if t.grad is not None else np.zeros_like(t.data)
        err = rel_err(np.asarray(got, dtype=np.float64), fd)
        assert err < tol, f"gradient mismatch for {name}: rel err {err:.3e}"
