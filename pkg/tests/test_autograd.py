from decimal import Decimal, getcontext

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sxsenti.nn import functional as F
from sxsenti.nn import (
    GRU, Adam, AdamW, BiGRU, Conv1d, Dropout, Embedding, GRUCell, LayerNorm, Linear, MaskedMaxPool, ReLU,
    grad_check, make_optimizer,
)

RNG = np.random.default_rng(1234)


# ---- loop oracles --------------------------------------------------------

def conv_loops(x, w, b):
    B, T, d = x.shape
    nf, width, _ = w.shape
    out = np.zeros((B, T - width + 1, nf))
    for i in range(B):
        for t in range(T - width + 1):
            for f in range(nf):
                s = b[f]
                for k in range(width):
                    for c in range(d):
                        s += x[i, t + k, c] * w[f, k, c]
                out[i, t, f] = s
    return out


def linear_loops(x, w, b):
    out = np.zeros((x.shape[0], w.shape[0]))
    for i in range(x.shape[0]):
        for j in range(w.shape[0]):
            out[i, j] = b[j] + sum(x[i, k] * w[j, k] for k in range(x.shape[1]))
    return out


def pool_loops(x, lengths):
    B, _, nf = x.shape
    out = np.zeros((B, nf))
    for i in range(B):
        for f in range(nf):
            out[i, f] = max(x[i, t, f] for t in range(lengths[i]))
    return out


def cell_reference(x, h, wi, wh, b):
    """GRU step written gate by gate."""
    H = h.shape[1]
    sig = lambda a: 1 / (1 + np.exp(-a))
    z = sig(x @ wi[:H].T + h @ wh[:H].T + b[:H])
    r = sig(x @ wi[H:2 * H].T + h @ wh[H:2 * H].T + b[H:2 * H])
    c = np.tanh(x @ wi[2 * H:].T + (r * h) @ wh[2 * H:].T + b[2 * H:])
    return (1 - z) * h + z * c


# ---- embedding -----------------------------------------------------------

def test_embedding_pad_and_repeats():
    emb = Embedding(np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 4.0]]))
    np.testing.assert_array_equal(emb(np.array([[0]])), [[[0.0, 0.0]]])
    out = emb(np.array([[2, 2]]))
    np.testing.assert_array_equal(out[0, 0], out[0, 1])
    emb.backward(np.ones_like(out))
    np.testing.assert_array_equal(emb.grads["weight"], [[0, 0], [0, 0], [2, 2]])


def test_embedding_pad_gradient_zero_and_empty():
    emb = Embedding(RNG.standard_normal((4, 3)))
    out = emb(np.array([[0, 1, 0]]))
    emb.backward(np.ones_like(out))
    np.testing.assert_array_equal(emb.grads["weight"][0], 0.0)
    assert emb(np.zeros((0, 0), dtype=int)).shape == (0, 0, 3)
    with pytest.raises(IndexError):
        emb(np.array([[4]]))


# ---- conv / relu / pool --------------------------------------------------

def test_conv_sliding_sums():
    out, _ = F.conv1d_forward(np.arange(1.0, 6.0).reshape(1, 5, 1), np.ones((1, 2, 1)), np.zeros(1))
    np.testing.assert_array_equal(out[0, :, 0], [3, 5, 7, 9])


def test_conv_zero_filter_gives_bias():
    out, _ = F.conv1d_forward(RNG.standard_normal((2, 6, 3)), np.zeros((4, 3, 3)), np.full(4, 0.5))
    np.testing.assert_array_equal(out, 0.5)


def test_conv_matches_loops():
    x, w, b = RNG.standard_normal((2, 5, 3)), RNG.standard_normal((4, 2, 3)), RNG.standard_normal(4)
    np.testing.assert_allclose(F.conv1d_forward(x, w, b)[0], conv_loops(x, w, b), rtol=0, atol=1e-12)


def test_conv_rejects_short_input():
    with pytest.raises(ValueError):
        F.conv1d_forward(np.zeros((1, 2, 3)), np.zeros((1, 3, 3)), np.zeros(1))


def test_relu():
    out, mask = F.relu_forward(np.array([-1.0, 0.0, 2.0]))
    np.testing.assert_array_equal(out, [0, 0, 2])
    out, mask = F.relu_forward(-np.ones(4))
    np.testing.assert_array_equal(out, 0.0)
    np.testing.assert_array_equal(F.relu_backward(np.ones(4), mask), 0.0)


def test_masked_max_examples():
    col = np.array([1.0, 5.0, 3.0]).reshape(1, 3, 1)
    assert F.masked_max_forward(col, [3])[0][0, 0] == 5.0
    assert F.masked_max_forward(col, [1])[0][0, 0] == 1.0
    with pytest.raises(ValueError):
        F.masked_max_forward(col, [0])


def test_masked_max_matches_loops_and_ties_go_first():
    x = RNG.standard_normal((3, 6, 4))
    lengths = np.array([6, 2, 4])
    np.testing.assert_array_equal(F.masked_max_forward(x, lengths)[0], pool_loops(x, lengths))
    tie = np.array([2.0, 2.0, 1.0]).reshape(1, 3, 1)
    _, cache = F.masked_max_forward(tie, [3])
    np.testing.assert_array_equal(F.masked_max_backward(np.ones((1, 1)), cache)[0, :, 0], [1, 0, 0])


# ---- dropout -------------------------------------------------------------

def test_dropout_modes():
    x = RNG.standard_normal((4, 5))
    np.testing.assert_array_equal(Dropout(0.0, np.random.default_rng(0))(x), x)
    d = Dropout(0.7, np.random.default_rng(0)).eval()
    np.testing.assert_array_equal(d(x), x)
    with pytest.raises(ValueError):
        Dropout(1.0, np.random.default_rng(0))


def test_dropout_mean_and_backward_mask():
    d = Dropout(0.5, np.random.default_rng(3))
    out = d(np.ones(100_000))
    assert 0.98 <= out.mean() <= 1.02
    assert set(np.unique(out)) <= {0.0, 2.0}
    np.testing.assert_array_equal(d.backward(np.ones(100_000)), out)


# ---- linear / layer norm -------------------------------------------------

def test_linear_examples():
    x = RNG.standard_normal((3, 4))
    np.testing.assert_array_equal(F.linear_forward(x, np.eye(4), np.zeros(4))[0], x)
    assert F.linear_forward(np.array([[3.0]]), np.array([[2.0]]), np.array([1.0]))[0][0, 0] == 7.0
    w, b = RNG.standard_normal((5, 4)), RNG.standard_normal(5)
    np.testing.assert_allclose(F.linear_forward(x, w, b)[0], linear_loops(x, w, b), rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        F.linear_forward(x, np.zeros((2, 3)), np.zeros(2))


def test_layer_norm_examples():
    out, _ = F.layer_norm_forward(np.array([[1.0, 2.0, 3.0]]), np.ones(3), np.zeros(3), eps=1e-12)
    np.testing.assert_allclose(out[0], [-1.2247, 0.0, 1.2247], atol=1e-3)
    bias = np.array([0.3, -0.2, 0.1])
    out, _ = F.layer_norm_forward(np.full((1, 3), 7.0), np.ones(3), bias)
    assert np.all(np.abs(out) <= np.abs(bias) + 1e-2)


# ---- GRU -----------------------------------------------------------------

def test_gru_cell_zero_weights():
    cell = GRUCell(3, 4, np.random.default_rng(0))
    for v in cell.params.values():
        v[...] = 0.0
    h = RNG.standard_normal((2, 4))
    np.testing.assert_allclose(cell(RNG.standard_normal((2, 3)), h), 0.5 * h)
    np.testing.assert_array_equal(cell(RNG.standard_normal((2, 3)), np.zeros((2, 4))), 0.0)


def test_gru_cell_matches_reference():
    cell = GRUCell(3, 4, np.random.default_rng(0))
    cell.params["bias"][...] = RNG.standard_normal(12)
    x, h = RNG.standard_normal((2, 3)), RNG.standard_normal((2, 4))
    p = cell.params
    np.testing.assert_allclose(cell(x, h), cell_reference(x, h, p["w_input"], p["w_hidden"], p["bias"]), atol=1e-12)
    with pytest.raises(ValueError):
        cell(RNG.standard_normal((2, 5)), h)


def test_gru_cell_gradients():
    assert grad_check(GRUCell(3, 4, np.random.default_rng(0)),
                      [RNG.standard_normal((2, 3)), RNG.standard_normal((2, 4))]) < 1e-4


def test_gru_matches_unrolled_cell():
    gru = GRU(3, 4, np.random.default_rng(5))
    x = RNG.standard_normal((1, 5, 3))
    p = gru.params
    h = np.zeros((1, 4))
    for t in range(3):
        h = cell_reference(x[:, t], h, p["w_input"], p["w_hidden"], p["bias"])
    np.testing.assert_allclose(gru(x, [3]), h, atol=1e-12)


def test_bigru_single_step_and_zero_weights():
    enc = BiGRU(3, 4, np.random.default_rng(2))
    x = RNG.standard_normal((1, 1, 3))
    fwd = enc.forward_gru.params
    bwd = enc.backward_gru.params
    expect = 0.5 * (cell_reference(x[:, 0], np.zeros((1, 4)), fwd["w_input"], fwd["w_hidden"], fwd["bias"])
                    + cell_reference(x[:, 0], np.zeros((1, 4)), bwd["w_input"], bwd["w_hidden"], bwd["bias"]))
    np.testing.assert_allclose(enc(x, [1]), expect, atol=1e-12)
    for _, p, _ in enc.named_parameters():
        p[...] = 0.0
    np.testing.assert_array_equal(enc(RNG.standard_normal((2, 3, 3)), [3, 1]), 0.0)


def test_bigru_padding_invariance():
    enc = BiGRU(3, 4, np.random.default_rng(2))
    x = RNG.standard_normal((2, 3, 3))
    alone = enc(x[:1, :1], [1])
    np.testing.assert_allclose(enc(x, [1, 3])[0], alone[0], atol=1e-12)


def test_bigru_encoder_gradients():
    enc = BiGRU(3, 4, np.random.default_rng(2))
    assert grad_check(enc, [RNG.standard_normal((3, 5, 3)), np.array([5, 1, 3])]) < 1e-4


# ---- loss ----------------------------------------------------------------

def ce_decimal(logits, target):
    getcontext().prec = 50
    ds = [Decimal(repr(v)) for v in logits]
    return float(sum(d.exp() for d in ds).ln() - ds[target])


@pytest.mark.parametrize("logits, target", [([0.0, 0.0, 0.0], 1), ([1.0, 2.0, 3.0], 2), ([-2.5, 0.25, 4.0], 0)])
def test_cross_entropy_matches_high_precision(logits, target):
    loss, _ = F.softmax_cross_entropy(np.array([logits]), [target])
    assert loss == pytest.approx(ce_decimal(logits, target), abs=1e-12)


def test_cross_entropy_examples():
    assert F.softmax_cross_entropy(np.zeros((1, 3)), [2])[0] == pytest.approx(1.0986, abs=1e-4)
    assert F.softmax_cross_entropy(np.array([[30.0, 0.0, 0.0]]), [0])[0] < 1e-9
    assert F.softmax_cross_entropy(np.array([[1.0, 2.0, 3.0]]), [2])[0] == pytest.approx(0.4076, abs=1e-4)
    with pytest.raises(ValueError):
        F.softmax_cross_entropy(np.zeros((1, 3)), [3])


@settings(max_examples=100)
@given(arrays(np.float64, (4, 3), elements=st.floats(-50, 50)), st.lists(st.integers(0, 2), min_size=4, max_size=4))
def test_cross_entropy_gradient_rows_sum_to_zero(logits, targets):
    loss, grad = F.softmax_cross_entropy(logits, targets)
    assert np.isfinite(loss) and loss >= 0
    np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)


# ---- optimizers ----------------------------------------------------------

def adam_scalar(p, grads, lr, b1=0.9, b2=0.999, eps=1e-8, wd=0.0):
    m = v = 0.0
    for t, g in enumerate(grads, 1):
        p -= lr * wd * p
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        p -= lr * (m / (1 - b1 ** t)) / ((v / (1 - b2 ** t)) ** 0.5 + eps)
    return p


def _one_param(value):
    p = np.array([value])
    return p, np.zeros(1)


def test_adam_first_step():
    p, g = _one_param(0.0)
    opt = Adam([("p", p, g)], lr=0.001)
    g[0] = 1.0
    opt.step()
    assert p[0] == pytest.approx(-0.001, abs=1e-6)


def test_adamw_decay_only():
    p, g = _one_param(1.0)
    AdamW([("p", p, g)], lr=0.001, weight_decay=0.01).step()
    assert p[0] == pytest.approx(0.99999, abs=1e-12)


def test_adam_zero_gradient_is_noop():
    p, g = _one_param(3.25)
    opt = Adam([("p", p, g)])
    for _ in range(5):
        opt.step()
    assert p[0] == 3.25


@pytest.mark.parametrize("kind, wd", [("adam", 0.0), ("adamw", 0.01)])
def test_optimizer_matches_scalar_reference(kind, wd):
    grads = [0.5, -1.0, 2.0, 0.1, -0.3]
    p, g = _one_param(0.7)
    opt = make_optimizer(kind, [("p", p, g)], lr=0.01, weight_decay=wd)
    for grad in grads:
        g[0] = grad
        opt.step()
    assert p[0] == pytest.approx(adam_scalar(0.7, grads, 0.01, wd=wd), abs=1e-15)
    with pytest.raises(ValueError):
        make_optimizer("sgd", [], lr=0.1)


# ---- gradient checks & layer contract ------------------------------------

def test_linear_grad_check_tight():
    assert grad_check(Linear(5, 4, np.random.default_rng(0)), [RNG.standard_normal((3, 5))]) < 1e-6


@pytest.mark.parametrize("layer, inputs", [
    (LayerNorm(5), [RNG.standard_normal((3, 5))]),
    (Conv1d(3, 2, 4, np.random.default_rng(0)), [RNG.standard_normal((2, 5, 4))]),
])
def test_layer_grad_checks(layer, inputs):
    assert grad_check(layer, inputs) < 1e-4


def test_backward_requires_forward():
    lin = Linear(2, 2, np.random.default_rng(0))
    with pytest.raises(RuntimeError):
        lin.backward(np.ones((1, 2)))
    lin(np.ones((1, 2)))
    lin.backward(np.ones((1, 2)))
    with pytest.raises(RuntimeError):
        lin.backward(np.ones((1, 2)))


def test_gradients_accumulate_until_zeroed():
    lin = Linear(2, 2, np.random.default_rng(0))
    x = np.array([[1.0, 2.0]])
    for _ in range(2):
        lin(x)
        lin.backward(np.ones((1, 2)))
    np.testing.assert_array_equal(lin.grads["bias"], [2.0, 2.0])
    lin.zero_grad()
    np.testing.assert_array_equal(lin.grads["bias"], 0.0)


# ---- properties ----------------------------------------------------------

_small = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (2, 7, 3), elements=_small), st.lists(st.integers(1, 4), min_size=2, max_size=2),
       arrays(np.float64, (2, 7, 3), elements=_small))
def test_masked_pool_ignores_padding(x, lengths, noise):
    valid = np.arange(7)[None, :, None] < np.array(lengths)[:, None, None]
    dirty = np.where(valid, x, noise)
    np.testing.assert_array_equal(F.masked_max_forward(x, lengths)[0], F.masked_max_forward(dirty, lengths)[0])
    pool = MaskedMaxPool()
    pool(dirty, lengths)
    grad = pool.backward(np.ones((2, 3)))
    assert np.all(grad[~np.broadcast_to(valid, grad.shape)] == 0.0)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (1, 6, 2), elements=_small), arrays(np.float64, (1, 6, 2), elements=_small),
       st.floats(-3, 3), st.floats(-3, 3))
def test_conv_is_linear_in_input(x1, x2, a, b):
    w = np.random.default_rng(0).standard_normal((3, 2, 2))
    zero = np.zeros(3)
    lhs = F.conv1d_forward(a * x1 + b * x2, w, zero)[0]
    rhs = a * F.conv1d_forward(x1, w, zero)[0] + b * F.conv1d_forward(x2, w, zero)[0]
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_relu_layer_contract():
    relu = ReLU()
    out = relu(np.array([[-1.0, 2.0]]))
    np.testing.assert_array_equal(relu.backward(np.ones_like(out)), [[0.0, 1.0]])
