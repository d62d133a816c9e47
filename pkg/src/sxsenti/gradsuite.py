"""Finite-difference checks over every layer and both full models."""
from __future__ import annotations

import numpy as np

from .models import BiGRUClassifier, CnnConfig, GruConfig, TextCNN
from .nn import (
    BiGRU, Conv1d, GRUCell, Layer, LayerNorm, Linear, MaskedMaxPool, ReLU, grad_check, set_dropout_frozen,
)

TOLERANCE = 1e-4


class ConvBlock(Layer):
    """conv1d -> relu -> masked max-pool."""

    def __init__(self, n_filters, width, in_dim, rng):
        super().__init__()
        self.conv = Conv1d(n_filters, width, in_dim, rng)
        self.relu = ReLU()
        self.pool = MaskedMaxPool()

    def forward(self, x, lengths):
        return self.pool(self.relu(self.conv(x)), np.asarray(lengths) - self.conv.width + 1)

    def backward(self, dout):
        return self.conv.backward(self.relu.backward(self.pool.backward(dout)))


class EncoderHead(Layer):
    """bigru -> linear; the suite scores it with cross-entropy."""

    def __init__(self, in_dim, hidden, classes, rng):
        super().__init__()
        self.encoder = BiGRU(in_dim, hidden, rng)
        self.fc = Linear(hidden, classes, rng)

    def forward(self, x, lengths):
        return self.fc(self.encoder(x, lengths))

    def backward(self, dout):
        return self.encoder.backward(self.fc.backward(dout))


def _offset_biases(model: Layer, rng: np.random.Generator) -> None:
    # zero biases leave all-padding conv windows exactly on the relu kink
    for name, p, _ in model.named_parameters():
        if name.endswith("bias"):
            p[...] = rng.uniform(0.1, 0.3, p.shape)


def gradient_suite(seed: int = 0) -> dict[str, float]:
    """Max relative gradient error for each checked component."""
    rng = np.random.default_rng(seed)
    data = np.random.default_rng(seed + 1)
    results = {}
    results["linear"] = grad_check(Linear(5, 4, rng), [data.standard_normal((3, 5))])
    results["conv1d+relu+masked_max"] = grad_check(
        ConvBlock(4, 3, 5, rng), [data.standard_normal((3, 7, 5)), np.array([3, 7, 5])]
    )
    results["layer_norm"] = grad_check(LayerNorm(6), [data.standard_normal((4, 6))])
    results["gru_cell"] = grad_check(
        GRUCell(4, 5, rng), [data.standard_normal((3, 4)), data.standard_normal((3, 5))]
    )
    results["bigru+linear+loss"] = grad_check(
        EncoderHead(4, 5, 3, rng),
        [data.standard_normal((3, 6, 4)), np.array([6, 2, 4])],
        targets=np.array([0, 2, 1]),
    )

    ids = np.array([[2, 5, 3, 7, 1, 0], [4, 4, 6, 0, 0, 0], [8, 9, 0, 0, 0, 0]])
    lengths = np.array([6, 3, 2])
    targets = np.array([2, 0, 1])
    cnn = TextCNN(CnnConfig(embedding_dim=4, filter_widths=(2, 3, 4), filters_per_width=3, vocab_size=10), seed=seed)
    _offset_biases(cnn, rng)
    cnn.train()
    set_dropout_frozen(cnn)
    results["cnn_model"] = grad_check(cnn, [ids, lengths], targets=targets)

    gru = BiGRUClassifier(GruConfig(embedding_dim=4, hidden=5, vocab_size=10), seed=seed)
    gru.train()
    set_dropout_frozen(gru)
    results["gru_model"] = grad_check(gru, [ids, lengths], targets=targets)
    return results
