"""Forward/backward pairs for every differentiable operation.

Each ``*_forward`` returns ``(output, cache)`` and the matching ``*_backward``
consumes the upstream gradient and that cache. Arrays are float64 numpy
arrays; integer index arrays are never differentiated.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def embedding_forward(ids: np.ndarray, weight: np.ndarray):
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= weight.shape[0]):
        raise IndexError(f"embedding index out of range [0, {weight.shape[0]})")
    return weight[ids], (ids, weight.shape)


def embedding_backward(dout: np.ndarray, cache, pad_index: int | None = 0) -> np.ndarray:
    ids, shape = cache
    dweight = np.zeros(shape)
    np.add.at(dweight, ids.reshape(-1), dout.reshape(-1, shape[1]))
    if pad_index is not None:
        dweight[pad_index] = 0.0
    return dweight


def conv1d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """Valid 1-d convolution over time.

    x: [B, T, d], weight: [F, w, d], bias: [F] -> [B, T-w+1, F]
    """
    B, T, d = x.shape
    F, w, d2 = weight.shape
    if d != d2:
        raise ValueError(f"input width {d} does not match filter width {d2}")
    if T < w:
        raise ValueError(f"sequence length {T} shorter than filter width {w}")
    # [B, T', d, w] -> [B, T', w, d]
    windows = sliding_window_view(x, w, axis=1).transpose(0, 1, 3, 2)
    cols = windows.reshape(B * (T - w + 1), w * d)
    out = cols @ weight.reshape(F, w * d).T + bias
    return out.reshape(B, T - w + 1, F), (x.shape, cols, weight)


def conv1d_backward(dout: np.ndarray, cache):
    (B, T, d), cols, weight = cache
    F, w, _ = weight.shape
    Tp = T - w + 1
    d2 = dout.reshape(B * Tp, F)
    dweight = (d2.T @ cols).reshape(F, w, d)
    dbias = d2.sum(axis=0)
    dcols = (d2 @ weight.reshape(F, w * d)).reshape(B, Tp, w, d)
    dx = np.zeros((B, T, d))
    for i in range(w):
        dx[:, i:i + Tp, :] += dcols[:, :, i, :]
    return dx, dweight, dbias


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0.0), x > 0


def relu_backward(dout: np.ndarray, cache) -> np.ndarray:
    return dout * cache


def masked_max_forward(x: np.ndarray, lengths):
    """Max over the first ``lengths[b]`` time steps of each row. x: [B, T, F] -> [B, F]."""
    B, T, F = x.shape
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.shape != (B,):
        raise ValueError("one valid length per batch row is required")
    if np.any(lengths < 1) or np.any(lengths > T):
        raise ValueError(f"valid lengths must lie in [1, {T}]")
    valid = np.arange(T)[None, :] < lengths[:, None]
    masked = np.where(valid[:, :, None], x, -np.inf)
    # np.argmax returns the first maximal index
    arg = masked.argmax(axis=1)
    out = np.take_along_axis(x, arg[:, None, :], axis=1)[:, 0, :]
    return out, (x.shape, arg)


def masked_max_backward(dout: np.ndarray, cache) -> np.ndarray:
    shape, arg = cache
    dx = np.zeros(shape)
    np.put_along_axis(dx, arg[:, None, :], dout[:, None, :], axis=1)
    return dx


def linear_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    if x.shape[-1] != weight.shape[1]:
        raise ValueError(f"input width {x.shape[-1]} does not match weight {weight.shape}")
    return x @ weight.T + bias, (x, weight)


def linear_backward(dout: np.ndarray, cache):
    x, weight = cache
    return dout @ weight, dout.T @ x, dout.sum(axis=0)


def layer_norm_forward(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = 1e-5):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    return xhat * gain + bias, (xhat, inv_std, gain)


def layer_norm_backward(dout: np.ndarray, cache):
    xhat, inv_std, gain = cache
    n = xhat.shape[-1]
    dgain = (dout * xhat).sum(axis=0)
    dbias = dout.sum(axis=0)
    dxhat = dout * gain
    dx = inv_std / n * (
        n * dxhat
        - dxhat.sum(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )
    return dx, dgain, dbias


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# GRU parameters are stacked gate-wise in the order (update z, reset r, candidate):
#   w_input: [3H, d], w_hidden: [3H, H], bias: [3H]


def gru_step_forward(gx: np.ndarray, h: np.ndarray, w_hidden: np.ndarray):
    """One GRU step from precomputed input projections ``gx = x @ w_input.T + bias``."""
    H = h.shape[1]
    gh = h @ w_hidden[: 2 * H].T
    z = sigmoid(gx[:, :H] + gh[:, :H])
    r = sigmoid(gx[:, H:2 * H] + gh[:, H:])
    rh = r * h
    cand = np.tanh(gx[:, 2 * H:] + rh @ w_hidden[2 * H:].T)
    h_new = (1.0 - z) * h + z * cand
    return h_new, (h, z, r, rh, cand)


def gru_step_backward(dh_new: np.ndarray, cache, w_hidden: np.ndarray):
    """Returns (d gx, d h_prev, d w_hidden)."""
    h, z, r, rh, cand = cache
    H = h.shape[1]
    dz = dh_new * (cand - h)
    dcand = dh_new * z
    dh = dh_new * (1.0 - z)
    da_cand = dcand * (1.0 - cand * cand)
    drh = da_cand @ w_hidden[2 * H:]
    dr = drh * h
    dh += drh * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)
    da_zr = np.concatenate([da_z, da_r], axis=1)
    dh += da_zr @ w_hidden[: 2 * H]
    dw_hidden = np.concatenate([da_zr.T @ h, da_cand.T @ rh], axis=0)
    dgx = np.concatenate([da_zr, da_cand], axis=1)
    return dgx, dh, dw_hidden


def gru_cell_forward(x, h, w_input, w_hidden, bias):
    """h_t = (1 - z) * h_prev + z * tanh(W_h x + U_h (r * h_prev) + b_h)."""
    if x.shape[1] != w_input.shape[1] or h.shape[1] * 3 != w_input.shape[0]:
        raise ValueError("GRU cell shape mismatch")
    gx = x @ w_input.T + bias
    h_new, cache = gru_step_forward(gx, h, w_hidden)
    return h_new, (x, w_input, w_hidden, cache)


def gru_cell_backward(dh_new, cache):
    """Returns (dx, dh_prev, dw_input, dw_hidden, dbias)."""
    x, w_input, w_hidden, step_cache = cache
    dgx, dh, dw_hidden = gru_step_backward(dh_new, step_cache, w_hidden)
    return dgx @ w_input, dh, dgx.T @ x, dw_hidden, dgx.sum(axis=0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, targets) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood of ``targets`` and its gradient w.r.t. ``logits``."""
    targets = np.asarray(targets, dtype=np.int64)
    B, C = logits.shape
    if targets.shape != (B,):
        raise ValueError("one target per batch row is required")
    if np.any(targets < 0) or np.any(targets >= C):
        raise ValueError(f"target indices must lie in [0, {C})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(B)
    loss = float(np.mean(logsumexp - shifted[rows, targets]))
    grad = np.exp(shifted - logsumexp[:, None])
    grad[rows, targets] -= 1.0
    return loss, grad / B
