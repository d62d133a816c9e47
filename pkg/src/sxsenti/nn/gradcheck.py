"""Central-difference verification of analytic gradients."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .functional import softmax_cross_entropy
from .layers import Layer


def _scalar(out: np.ndarray, targets, projection):
    if targets is not None:
        return softmax_cross_entropy(out, targets)
    return float(np.sum(out * projection)), projection


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)


def grad_check(
    layer: Layer,
    inputs: Sequence,
    eps: float = 1e-5,
    targets=None,
    seed: int = 0,
    check_inputs: bool = True,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    The checked scalar is the cross-entropy against ``targets`` when given,
    otherwise a fixed random projection of the layer output. Every parameter
    entry and every entry of the floating-point inputs is perturbed. The
    layer must be deterministic (eval mode or frozen dropout).
    """
    inputs = list(inputs)
    float_slots = [
        i for i, x in enumerate(inputs)
        if check_inputs and isinstance(x, np.ndarray) and np.issubdtype(x.dtype, np.floating)
    ]

    out = layer.forward(*inputs)
    projection = np.random.default_rng(seed).standard_normal(out.shape)

    def f() -> float:
        value, _ = _scalar(layer.forward(*inputs), targets, projection)
        layer._cache = None
        for _, child in _walk(layer):
            child._cache = None
        return value

    layer.zero_grad()
    _, dout = _scalar(out, targets, projection)
    din = layer.backward(dout)
    if not isinstance(din, tuple):
        din = (din,)
    analytic_inputs = dict(zip(float_slots, [d for d in din if d is not None]))

    worst = 0.0
    frozen = layer.named_frozen_masks()
    checks = [(p, g.copy(), frozen.get(n)) for n, p, g in layer.named_parameters()]
    checks += [(inputs[i], analytic_inputs[i], None) for i in float_slots if i in analytic_inputs]
    for array, analytic, skip in checks:
        numeric = analytic.copy() if skip is not None else np.zeros_like(array)
        it = np.nditer(array, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            if skip is not None and skip[idx]:
                continue
            orig = array[idx]
            array[idx] = orig + eps
            up = f()
            array[idx] = orig - eps
            down = f()
            array[idx] = orig
            numeric[idx] = (up - down) / (2 * eps)
        if array.size:
            worst = max(worst, float(relative_error(analytic, numeric).max()))
    return worst


def _walk(layer: Layer):
    for name, child in layer.children():
        yield name, child
        yield from _walk(child)
