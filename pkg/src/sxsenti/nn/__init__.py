"""Minimal numpy layer core with forward/backward passes and optimizers."""
from .functional import softmax, softmax_cross_entropy
from .gradcheck import grad_check
from .layers import (
    GRU,
    BiGRU,
    Conv1d,
    Dropout,
    Embedding,
    GRUCell,
    Layer,
    LayerNorm,
    Linear,
    MaskedMaxPool,
    ReLU,
    set_dropout_frozen,
)
from .optim import Adam, AdamW, make_optimizer

__all__ = [
    "Adam", "AdamW", "BiGRU", "Conv1d", "Dropout", "Embedding", "GRU", "GRUCell",
    "Layer", "LayerNorm", "Linear", "MaskedMaxPool", "ReLU", "grad_check",
    "make_optimizer", "set_dropout_frozen", "softmax", "softmax_cross_entropy",
]
