"""Adam and AdamW over (name, param, grad) triples, updating params in place."""
from __future__ import annotations

from typing import Iterable

import numpy as np


class Adam:
    def __init__(
        self,
        parameters: Iterable[tuple[str, np.ndarray, np.ndarray]],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        if lr < 0:
            raise ValueError(f"learning rate must be non-negative, got {lr}")
        self.parameters = list(parameters)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p, _ in self.parameters}
        self.v = {name: np.zeros_like(p) for name, p, _ in self.parameters}

    def _decay(self, param: np.ndarray) -> None:
        pass

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, param, grad in self.parameters:
            if param.shape != grad.shape:
                raise ValueError(f"gradient shape {grad.shape} != parameter shape {param.shape} for {name}")
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            self._decay(param)
            param -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


class AdamW(Adam):
    """Adam with decoupled weight decay applied before the moment update."""

    def __init__(self, parameters, lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8, weight_decay: float = 0.01):
        super().__init__(parameters, lr, betas, eps)
        self.weight_decay = weight_decay

    def _decay(self, param: np.ndarray) -> None:
        if self.weight_decay:
            param -= self.lr * self.weight_decay * param


def make_optimizer(kind: str, parameters, lr: float, weight_decay: float = 0.01) -> Adam:
    kind = kind.lower()
    if kind == "adam":
        return Adam(parameters, lr=lr)
    if kind == "adamw":
        return AdamW(parameters, lr=lr, weight_decay=weight_decay)
    raise ValueError(f"unknown optimizer {kind!r}")
