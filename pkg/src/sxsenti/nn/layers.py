"""Stateful layers wrapping the functional ops.

Every layer follows one contract: ``forward`` caches what ``backward``
needs, ``backward`` consumes that cache (at most once per forward), returns
the gradient for the layer's differentiable input(s) and accumulates
parameter gradients into ``grads`` until ``zero_grad`` is called.
"""
from __future__ import annotations

from typing import Iterator

import numpy as np

from . import functional as F


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.training = True
        self._cache = None

    # children are discovered from attributes so composite models stay terse
    def children(self) -> Iterator[tuple[str, "Layer"]]:
        for name, value in vars(self).items():
            if isinstance(value, Layer):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Layer):
                        yield f"{name}.{i}", item

    def add_param(self, name: str, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        return value

    def named_parameters(self, prefix: str = "") -> list[tuple[str, np.ndarray, np.ndarray]]:
        out = [(prefix + n, p, self.grads[n]) for n, p in self.params.items()]
        for name, child in self.children():
            out.extend(child.named_parameters(f"{prefix}{name}."))
        return out

    def frozen_entries(self, name: str) -> np.ndarray | None:
        """Boolean mask of entries of parameter ``name`` that never receive gradient."""
        return None

    def named_frozen_masks(self, prefix: str = "") -> dict[str, np.ndarray]:
        out = {}
        for n in self.params:
            mask = self.frozen_entries(n)
            if mask is not None:
                out[prefix + n] = mask
        for name, child in self.children():
            out.update(child.named_frozen_masks(f"{prefix}{name}."))
        return out

    def zero_grad(self) -> None:
        for _, _, g in self.named_parameters():
            g.fill(0.0)

    def train(self, mode: bool = True) -> "Layer":
        self.training = mode
        for _, child in self.children():
            child.train(mode)
        return self

    def eval(self) -> "Layer":
        return self.train(False)

    def _take_cache(self):
        if self._cache is None:
            raise RuntimeError(f"{type(self).__name__}.backward called without a pending forward")
        cache, self._cache = self._cache, None
        return cache

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Embedding(Layer):
    def __init__(self, weight: np.ndarray, pad_index: int = 0):
        super().__init__()
        self.pad_index = pad_index
        self.add_param("weight", weight)

    def forward(self, ids):
        out, self._cache = F.embedding_forward(ids, self.params["weight"])
        return out

    def backward(self, dout):
        self.grads["weight"] += F.embedding_backward(dout, self._take_cache(), self.pad_index)
        return None

    def frozen_entries(self, name):
        mask = np.zeros(self.params[name].shape, dtype=bool)
        if self.pad_index is not None:
            mask[self.pad_index] = True
        return mask


class Conv1d(Layer):
    def __init__(self, n_filters: int, width: int, in_dim: int, rng: np.random.Generator):
        super().__init__()
        self.width = width
        self.add_param("weight", glorot_uniform(rng, (n_filters, width, in_dim), width * in_dim, n_filters))
        self.add_param("bias", np.zeros(n_filters))

    def forward(self, x):
        out, self._cache = F.conv1d_forward(x, self.params["weight"], self.params["bias"])
        return out

    def backward(self, dout):
        dx, dw, db = F.conv1d_backward(dout, self._take_cache())
        self.grads["weight"] += dw
        self.grads["bias"] += db
        return dx


class ReLU(Layer):
    def forward(self, x):
        out, self._cache = F.relu_forward(x)
        return out

    def backward(self, dout):
        return F.relu_backward(dout, self._take_cache())


class MaskedMaxPool(Layer):
    def forward(self, x, lengths):
        out, self._cache = F.masked_max_forward(x, lengths)
        return out

    def backward(self, dout):
        return F.masked_max_backward(dout, self._take_cache())


class Dropout(Layer):
    """Inverted dropout; identity in eval mode.

    ``frozen`` reuses the previous mask, which makes a train-mode forward a
    deterministic function for finite-difference checks.
    """

    def __init__(self, p: float, rng: np.random.Generator):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
        self.p = p
        self.rng = rng
        self.frozen = False
        self._mask = None

    def forward(self, x):
        if not self.training or self.p == 0.0:
            self._cache = 1.0
            return x
        if not (self.frozen and self._mask is not None and self._mask.shape == x.shape):
            self._mask = (self.rng.random(x.shape) >= self.p) / (1.0 - self.p)
        self._cache = self._mask
        return x * self._mask

    def backward(self, dout):
        return dout * self._take_cache()


class Linear(Layer):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        self.add_param("weight", glorot_uniform(rng, (out_dim, in_dim), in_dim, out_dim))
        self.add_param("bias", np.zeros(out_dim))

    def forward(self, x):
        out, self._cache = F.linear_forward(x, self.params["weight"], self.params["bias"])
        return out

    def backward(self, dout):
        dx, dw, db = F.linear_backward(dout, self._take_cache())
        self.grads["weight"] += dw
        self.grads["bias"] += db
        return dx


class LayerNorm(Layer):
    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        if dim < 2:
            raise ValueError("layer norm needs at least 2 features")
        self.eps = eps
        self.add_param("gain", np.ones(dim))
        self.add_param("bias", np.zeros(dim))

    def forward(self, x):
        out, self._cache = F.layer_norm_forward(x, self.params["gain"], self.params["bias"], self.eps)
        return out

    def backward(self, dout):
        dx, dg, db = F.layer_norm_backward(dout, self._take_cache())
        self.grads["gain"] += dg
        self.grads["bias"] += db
        return dx


def _gru_params(layer: Layer, in_dim: int, hidden: int, rng: np.random.Generator) -> None:
    w_in = np.concatenate([glorot_uniform(rng, (hidden, in_dim), in_dim, hidden) for _ in range(3)])
    w_h = np.concatenate([glorot_uniform(rng, (hidden, hidden), hidden, hidden) for _ in range(3)])
    layer.add_param("w_input", w_in)
    layer.add_param("w_hidden", w_h)
    layer.add_param("bias", np.zeros(3 * hidden))


class GRUCell(Layer):
    """A single GRU step: ``forward(x, h_prev) -> h``."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.hidden = hidden
        _gru_params(self, in_dim, hidden, rng)

    def forward(self, x, h):
        p = self.params
        out, self._cache = F.gru_cell_forward(x, h, p["w_input"], p["w_hidden"], p["bias"])
        return out

    def backward(self, dout):
        dx, dh, dwi, dwh, db = F.gru_cell_backward(dout, self._take_cache())
        self.grads["w_input"] += dwi
        self.grads["w_hidden"] += dwh
        self.grads["bias"] += db
        return dx, dh


class GRU(Layer):
    """Unidirectional GRU returning the state after each row's last valid step.

    ``reverse`` walks each row from position ``length-1`` down to 0; padded
    positions never update the state in either direction.
    """

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, reverse: bool = False):
        super().__init__()
        self.hidden = hidden
        self.reverse = reverse
        _gru_params(self, in_dim, hidden, rng)

    def forward(self, x, lengths):
        B, T, d = x.shape
        p = self.params
        lengths = np.asarray(lengths, dtype=np.int64)
        if np.any(lengths < 1) or np.any(lengths > T):
            raise ValueError(f"valid lengths must lie in [1, {T}]")
        gx_all = (x.reshape(B * T, d) @ p["w_input"].T + p["bias"]).reshape(B, T, -1)
        h = np.zeros((B, self.hidden))
        steps = []
        for t in (range(T - 1, -1, -1) if self.reverse else range(T)):
            live = (t < lengths)[:, None]
            h_new, cache = F.gru_step_forward(gx_all[:, t], h, p["w_hidden"])
            h = np.where(live, h_new, h)
            steps.append((t, live, cache))
        self._cache = (x, steps)
        return h

    def backward(self, dh):
        x, steps = self._take_cache()
        B, T, d = x.shape
        w_hidden = self.params["w_hidden"]
        dgx_all = np.zeros((B, T, 3 * self.hidden))
        dw_hidden = np.zeros_like(w_hidden)
        for t, live, cache in reversed(steps):
            dgx, dh_prev, dwh = F.gru_step_backward(np.where(live, dh, 0.0), cache, w_hidden)
            dgx_all[:, t] = dgx
            dw_hidden += dwh
            dh = np.where(live, dh_prev, dh)
        dgx_flat = dgx_all.reshape(B * T, -1)
        self.grads["w_input"] += dgx_flat.T @ x.reshape(B * T, d)
        self.grads["w_hidden"] += dw_hidden
        self.grads["bias"] += dgx_flat.sum(axis=0)
        return (dgx_flat @ self.params["w_input"]).reshape(B, T, d)


class BiGRU(Layer):
    """Average of the forward and backward final states: [B, T, d] -> [B, H]."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        super().__init__()
        self.forward_gru = GRU(in_dim, hidden, rng)
        self.backward_gru = GRU(in_dim, hidden, rng, reverse=True)

    def forward(self, x, lengths):
        return 0.5 * (self.forward_gru(x, lengths) + self.backward_gru(x, lengths))

    def backward(self, dout):
        return self.forward_gru.backward(0.5 * dout) + self.backward_gru.backward(0.5 * dout)


def set_dropout_frozen(layer: Layer, frozen: bool = True) -> None:
    if isinstance(layer, Dropout):
        layer.frozen = frozen
    for _, child in layer.children():
        set_dropout_frozen(child, frozen)
