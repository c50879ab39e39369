"""Tensor core: kernel values against closed forms, gradients against finite differences."""

import numpy as np
import pytest

from latent_lookahead import numcore as nc

from helpers import check_grads_fd, finite_difference_grad, rel_err, scalarize


def test_masked_softmax_uniform_row():
    probs = nc.masked_softmax_rows(nc.tensor([[0.0, 0.0]]), np.array([[True, True]]))
    assert np.array_equal(probs.data, np.array([[0.5, 0.5]], dtype=np.float32))


def test_masked_softmax_masks_to_zero_and_renormalizes():
    logits = nc.tensor([[1.0, 2.0, 3.0, 4.0]])
    mask = np.array([[True, False, True, False]])
    probs = nc.masked_softmax_rows(logits, mask).data[0]
    assert probs[1] == 0.0 and probs[3] == 0.0
    expect = np.exp([1.0, 3.0]) / np.exp([1.0, 3.0]).sum()
    assert np.allclose(probs[[0, 2]], expect, atol=1e-6)
    assert np.isclose(probs.sum(), 1.0, atol=1e-6)


def test_masked_softmax_empty_row_raises():
    with pytest.raises(ValueError):
        nc.masked_softmax_rows(nc.tensor([[1.0, 2.0]]), np.array([[False, False]]))


def test_layer_norm_constant_vector_is_zero():
    out = nc.layer_norm(nc.tensor([[3.5, 3.5, 3.5, 3.5]]))
    assert np.allclose(out.data, 0.0, atol=1e-6)


def test_layer_norm_zero_mean_unit_var(rng):
    x = nc.tensor(rng.normal(size=(5, 16)))
    y = nc.layer_norm(x).data
    assert np.allclose(y.mean(-1), 0.0, atol=1e-5)
    assert np.allclose(y.var(-1), 1.0, atol=1e-3)


def test_cross_entropy_uniform_logits_is_log_vocab():
    # 15-symbol vocabulary: uniform logits must score ln(15) per position
    logits = nc.tensor(np.zeros((7, 15)))
    loss = nc.cross_entropy_masked(logits, np.arange(7) % 15, np.ones(7, dtype=bool))
    assert np.isclose(loss.item(), np.log(15.0), atol=1e-6)
    logits4 = nc.tensor(np.zeros((3, 4)))
    loss4 = nc.cross_entropy_masked(logits4, np.zeros(3, dtype=int), np.ones(3, dtype=bool))
    assert np.isclose(loss4.item(), 1.3862944, atol=1e-6)


def test_cross_entropy_all_masked_raises():
    with pytest.raises(ValueError):
        nc.cross_entropy_masked(nc.tensor(np.zeros((3, 4))), np.zeros(3, dtype=int), np.zeros(3, dtype=bool))


def test_cross_entropy_respects_mask():
    logits = np.zeros((4, 6), dtype=np.float32)
    logits[2] = [9, 0, 0, 0, 0, 0]  # masked row: must not contribute
    mask = np.array([True, True, False, True])
    loss = nc.cross_entropy_masked(nc.tensor(logits), np.zeros(4, dtype=int), mask)
    assert np.isclose(loss.item(), np.log(6.0), atol=1e-6)


def test_cross_entropy_explicit_denominator():
    logits = nc.tensor(np.zeros((2, 4)))
    full = nc.cross_entropy_masked(logits, np.zeros(2, dtype=int), np.ones(2, dtype=bool))
    half = nc.cross_entropy_masked(logits, np.zeros(2, dtype=int), np.ones(2, dtype=bool), denom=4.0)
    assert np.isclose(half.item(), full.item() / 2.0, atol=1e-7)


def test_gelu_fixed_points():
    y = nc.gelu(nc.tensor([0.0, 10.0, -10.0])).data
    assert y[0] == 0.0
    assert np.isclose(y[1], 10.0, atol=1e-4)
    assert np.isclose(y[2], 0.0, atol=1e-4)


def test_dropout_eval_is_identity(rng):
    x = nc.tensor(rng.normal(size=(4, 8)))
    y = nc.dropout(x, 0.5, rng=rng, training=False)
    assert np.array_equal(y.data, x.data)


def test_dropout_train_scales_survivors(rng):
    x = nc.tensor(np.ones((1000,)))
    y = nc.dropout(x, 0.25, rng=rng, training=True).data
    kept = y != 0.0
    assert np.allclose(y[kept], 1.0 / 0.75)
    assert abs(kept.mean() - 0.75) < 0.05


def test_adam_first_step_moves_by_lr():
    p = nc.tensor(np.array([0.0]), requires_grad=True)
    p.grad = np.array([1.0], dtype=np.float32)
    params = {"p": p}
    state = nc.adam_state(params, lr=0.1)
    nc.adam_step(params, state)
    assert np.isclose(p.data[0], -0.1, atol=1e-8)


def test_adam_bias_correction_second_step():
    # two steps with constant unit gradient: both updates equal -lr/(1+eps-ish)
    p = nc.tensor(np.array([0.0], dtype=np.float64), requires_grad=True)
    params = {"p": p}
    state = nc.adam_state(params, lr=0.1)
    for _ in range(2):
        p.grad = np.array([1.0])
        nc.adam_step(params, state)
    assert np.isclose(p.data[0], -0.2, atol=1e-7)


def test_clip_global_norm_scales_and_reports():
    a = nc.tensor(np.zeros(3), requires_grad=True)
    b = nc.tensor(np.zeros(4), requires_grad=True)
    a.grad = np.full(3, 2.0, dtype=np.float32)
    b.grad = np.full(4, 2.0, dtype=np.float32)
    params = {"a": a, "b": b}
    pre = nc.clip_global_norm(params, 1.0)
    assert np.isclose(pre, 2.0 * np.sqrt(7.0), atol=1e-5)
    post = np.sqrt(sum(float((p.grad**2).sum()) for p in params.values()))
    assert np.isclose(post, 1.0, atol=1e-5)
    # below the threshold nothing changes
    a.grad = np.full(3, 0.1, dtype=np.float32)
    b.grad = np.full(4, 0.1, dtype=np.float32)
    nc.clip_global_norm(params, 1.0)
    assert np.allclose(a.grad, 0.1)


def test_nonfinite_gradient_aborts():
    p = nc.tensor(np.zeros(2), requires_grad=True)
    p.grad = np.array([np.nan, 1.0], dtype=np.float32)
    with pytest.raises(nc.NonFiniteError):
        nc.adam_step({"p": p}, nc.adam_state({"p": p}))


def test_backward_requires_scalar_and_finite():
    x = nc.tensor(np.ones((2, 2)), requires_grad=True)
    with nc.Tape() as tape:
        y = nc.add(x, x)
    with pytest.raises(ValueError):
        nc.backward(y, tape)
    with nc.Tape() as tape:
        loss, _ = scalarize(x, np.ones((4, 1)))
        bad = nc.scale(loss, np.nan)
    with pytest.raises(nc.NonFiniteError):
        nc.backward(bad, tape)


def test_grad_accumulates_over_shared_input(f64):
    x = nc.tensor(np.array([[2.0, 3.0]]), requires_grad=True)
    with nc.Tape() as tape:
        y = nc.add(x, x)
        loss, _ = scalarize(y, np.ones((2, 1)))
    nc.backward(loss, tape)
    assert np.allclose(x.grad, 2.0)


def test_no_tape_records_nothing():
    x = nc.tensor(np.ones((2, 2)), requires_grad=True)
    y = nc.add(x, x)
    assert y.requires_grad is False


def test_backward_visits_each_node_once(f64):
    x = nc.tensor(np.array([[1.0, 2.0]]), requires_grad=True)
    with nc.Tape() as tape:
        h = nc.gelu(x)
        h2 = nc.add(h, h)
        loss, _ = scalarize(h2, np.ones((2, 1)))
    n_nodes = len(tape)
    nc.backward(loss, tape)
    assert len(tape) == n_nodes
    assert all(node.saved is None for node in tape.nodes)


def test_unknown_op_kind_rejected():
    with pytest.raises(KeyError):
        nc.primitive_forward("definitely_not_an_op", ())


def test_core_kernel_set_is_registered():
    required = {
        "matmul", "add", "scale", "transpose_last_two", "gelu", "layer_norm",
        "masked_softmax_rows", "embedding_gather", "concat_rows", "slice_rows",
        "dropout", "cross_entropy_masked",
    }
    assert required.issubset(set(nc.op_kinds()))


# ---------------------------------------------------------------- gradients


def test_matmul_grads(f64, rng):
    a = nc.tensor(rng.normal(size=(3, 4)), requires_grad=True)
    b = nc.tensor(rng.normal(size=(4, 2)), requires_grad=True)
    w = rng.normal(size=(6, 1))
    check_grads_fd(lambda: scalarize(nc.matmul(a, b), w)[0], {"a": a, "b": b})


def test_matmul_batched_broadcast_grads(f64, rng):
    a = nc.tensor(rng.normal(size=(2, 3, 4)), requires_grad=True)
    b = nc.tensor(rng.normal(size=(4, 5)), requires_grad=True)
    w = rng.normal(size=(30, 1))
    check_grads_fd(lambda: scalarize(nc.matmul(a, b), w)[0], {"a": a, "b": b})


def test_add_mul_broadcast_grads(f64, rng):
    x = nc.tensor(rng.normal(size=(3, 4)), requires_grad=True)
    g = nc.tensor(rng.normal(size=(4,)), requires_grad=True)
    b = nc.tensor(rng.normal(size=(4,)), requires_grad=True)
    w = rng.normal(size=(12, 1))
    check_grads_fd(
        lambda: scalarize(nc.add(nc.mul(x, g), b), w)[0],
        {"x": x, "g": g, "b": b},
    )


def test_gelu_layer_norm_grads(f64, rng):
    x = nc.tensor(rng.normal(size=(2, 6)), requires_grad=True)
    w = rng.normal(size=(12, 1))
    check_grads_fd(lambda: scalarize(nc.gelu(x), w)[0], {"x": x})
    check_grads_fd(lambda: scalarize(nc.layer_norm(x), w)[0], {"x": x}, tol=5e-6)


def test_masked_softmax_grads(f64, rng):
    x = nc.tensor(rng.normal(size=(2, 5)), requires_grad=True)
    mask = np.array([[True, True, False, True, True], [True, False, True, True, False]])
    w = rng.normal(size=(10, 1))
    check_grads_fd(lambda: scalarize(nc.masked_softmax_rows(x, mask), w)[0], {"x": x})


def test_embedding_gather_grads(f64, rng):
    table = nc.tensor(rng.normal(size=(7, 3)), requires_grad=True)
    ids = np.array([1, 1, 4, 6])
    w = rng.normal(size=(12, 1))
    check_grads_fd(lambda: scalarize(nc.embedding_gather(table, ids), w)[0], {"table": table})


def test_concat_slice_grads(f64, rng):
    a = nc.tensor(rng.normal(size=(2, 3)), requires_grad=True)
    b = nc.tensor(rng.normal(size=(4, 3)), requires_grad=True)
    w = rng.normal(size=(9, 1))
    check_grads_fd(
        lambda: scalarize(nc.slice_rows(nc.concat_rows(a, b), 1, 4), w)[0],
        {"a": a, "b": b},
    )


def test_transpose_reshape_scale_grads(f64, rng):
    x = nc.tensor(rng.normal(size=(2, 3, 4)), requires_grad=True)
    w = rng.normal(size=(24, 1))

    def loss():
        y = nc.transpose_last_two(x)
        y = nc.transpose_axes(y, (1, 0, 2))
        y = nc.reshape(y, (4, 6))
        return scalarize(nc.scale(y, -1.7), w)[0]

    check_grads_fd(loss, {"x": x})


def test_gather_scatter_slots_grads(f64, rng):
    base = nc.tensor(rng.normal(size=(2, 5, 3)), requires_grad=True)
    vals = nc.tensor(rng.normal(size=(2, 2, 3)), requires_grad=True)
    idx = np.array([[1, 3], [0, 4]])
    w = rng.normal(size=(30, 1))
    check_grads_fd(
        lambda: scalarize(nc.scatter_slots(base, idx, vals), w)[0],
        {"base": base, "vals": vals},
    )
    src = nc.tensor(rng.normal(size=(2, 5, 3)), requires_grad=True)
    w2 = rng.normal(size=(12, 1))
    check_grads_fd(lambda: scalarize(nc.gather_slots(src, idx), w2)[0], {"src": src})


def test_cross_entropy_grads(f64, rng):
    logits = nc.tensor(rng.normal(size=(6, 5)), requires_grad=True)
    targets = rng.integers(0, 5, size=6)
    mask = np.array([True, True, False, True, True, False])
    check_grads_fd(
        lambda: nc.cross_entropy_masked(logits, targets, mask),
        {"logits": logits},
    )


def test_dropout_grad_matches_mask(f64):
    x = nc.tensor(np.ones((4, 4)), requires_grad=True)
    with nc.Tape() as tape:
        y = nc.dropout(x, 0.5, rng=np.random.default_rng(3), training=True)
        loss, _ = scalarize(y, np.ones((16, 1)))
    nc.backward(loss, tape)
    survivors = y.data != 0.0
    assert np.array_equal(x.grad != 0.0, survivors)
    assert np.allclose(x.grad[survivors], 2.0)


# ------------------------------------------------- deterministic reductions


def test_zero_insertion_invariance_in_deterministic_mode(f64, rng):
    # a masked row interleaved with dead columns must produce bit-identical
    # probabilities and weighted sums to the compact row
    logits_c = rng.normal(size=(1, 3))
    vals_c = rng.normal(size=(3, 2))
    probs_c = nc.masked_softmax_rows(nc.tensor(logits_c), np.ones((1, 3), bool))
    out_c = nc.matmul(probs_c, nc.tensor(vals_c)).data

    logits_p = np.zeros((1, 5))
    logits_p[0, [0, 2, 4]] = logits_c[0]
    logits_p[0, [1, 3]] = 99.0  # dead entries, masked out
    vals_p = np.zeros((5, 2))
    vals_p[[0, 2, 4]] = vals_c
    vals_p[[1, 3]] = -77.0
    mask_p = np.array([[True, False, True, False, True]])
    probs_p = nc.masked_softmax_rows(nc.tensor(logits_p), mask_p)
    out_p = nc.matmul(probs_p, nc.tensor(vals_p)).data

    assert np.array_equal(probs_c.data[0], probs_p.data[0][[0, 2, 4]])
    assert np.array_equal(out_c, out_p)


def test_finite_difference_helper_self_check():
    # oracle sanity: d/dx of sum(x^2) is 2x
    x = np.array([1.0, -2.0, 3.0])
    g = finite_difference_grad(lambda: float((x**2).sum()), x)
    assert rel_err(g, 2 * x) < 1e-8
