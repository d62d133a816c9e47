"""Batching and the epoch loop with best-epoch selection."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .evaluation import evaluate
from .models import round_to_float32
from .nn import make_optimizer, softmax_cross_entropy

logger = logging.getLogger(__name__)

MIN_BATCH_WIDTH = 4


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    model: str = "cnn"
    batch_size: int = 64
    epochs: int = 5
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    weight_decay: float = 0.0
    seed: int = 0
    normalize: bool = True
    lang_aware: bool = True
    max_vocab: int = 15000
    embedding_dim: int = 200
    dropout: float = 0.5
    filter_widths: tuple[int, ...] = (2, 3, 4)
    filters_per_width: int = 100
    hidden: int = 512

    def __post_init__(self):
        self.filter_widths = tuple(self.filter_widths)
        if self.model not in ("cnn", "gru"):
            raise ValueError(f"model must be 'cnn' or 'gru', got {self.model!r}")
        for name in ("batch_size", "epochs", "max_vocab", "embedding_dim"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")

    @classmethod
    def for_model(cls, model: str, **overrides) -> "TrainConfig":
        """Published hyperparameters for ``model``, updated with ``overrides``."""
        if model == "gru":
            base = dict(
                model="gru", batch_size=256, epochs=10, optimizer="adamw",
                weight_decay=0.01, embedding_dim=300, dropout=0.1, hidden=512,
            )
        else:
            base = dict(model="cnn")
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        merged = dict(data)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls.for_model(merged.pop("model", "cnn"), **merged)

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), **overrides)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["filter_widths"] = list(self.filter_widths)
        return d


@dataclass
class Batch:
    ids: np.ndarray  # [B, W] padded with the pad index
    lengths: np.ndarray  # [B]
    labels: np.ndarray  # [B]
    indices: np.ndarray  # positions in the source dataset


def pad_sequences(seqs: Sequence[Sequence[int]], pad_index: int = 0, min_width: int = MIN_BATCH_WIDTH):
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    if np.any(lengths < 1):
        raise ValueError("every sequence needs at least one token")
    width = max(int(lengths.max()), min_width)
    ids = np.full((len(seqs), width), pad_index, dtype=np.int64)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
    return ids, lengths


def make_batches(
    seqs: Sequence[Sequence[int]],
    labels: Sequence[int],
    batch_size: int,
    seed: int,
    epoch: int,
    pad_index: int = 0,
    shuffle: bool = True,
) -> list[Batch]:
    """Shuffle keyed by (seed, epoch), chunk, and right-pad each chunk to max(longest, 4)."""
    if len(seqs) == 0:
        raise ValueError("cannot batch an empty dataset")
    if len(seqs) != len(labels):
        raise ValueError("sequence and label counts differ")
    order = np.random.default_rng([seed, epoch]).permutation(len(seqs)) if shuffle else np.arange(len(seqs))
    labels = np.asarray(labels, dtype=np.int64)
    batches = []
    for start in range(0, len(order), batch_size):
        idx = order[start:start + batch_size]
        ids, lengths = pad_sequences([seqs[i] for i in idx], pad_index)
        batches.append(Batch(ids, lengths, labels[idx], idx))
    return batches


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_macro_f1: float
    train_accuracy: float | None = None


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_dev_macro_f1: float = 0.0
    checkpoint: str | None = None

    @property
    def losses(self) -> list[float]:
        return [e.train_loss for e in self.epochs]

    def to_dict(self) -> dict:
        return {
            "epochs": [asdict(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_dev_macro_f1": self.best_dev_macro_f1,
            "checkpoint": self.checkpoint,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def predict_logits(model, seqs: Sequence[Sequence[int]], batch_size: int = 256) -> np.ndarray:
    """Eval-mode logits in input order."""
    was_training = model.training
    model.eval()
    out = []
    for start in range(0, len(seqs), batch_size):
        ids, lengths = pad_sequences(seqs[start:start + batch_size])
        out.append(model.forward(ids, lengths))
        model._cache = None
    model.train(was_training)
    return np.concatenate(out) if out else np.zeros((0, model.config.classes))


def fit_epochs(
    model,
    train_seqs: Sequence[Sequence[int]],
    train_labels: Sequence[int],
    dev_seqs: Sequence[Sequence[int]],
    dev_labels: Sequence[int],
    config: TrainConfig,
    on_best: Callable[[Any], None] | None = None,
    track_train_accuracy: bool = False,
) -> TrainReport:
    """Train ``model`` in place and leave it holding the best epoch's parameters.

    Dev scoring uses the parameters rounded to checkpoint precision, so a
    checkpoint written by ``on_best`` reproduces the reported score exactly.
    """
    optimizer = make_optimizer(config.optimizer, model.named_parameters(), config.learning_rate, config.weight_decay)
    report = TrainReport()
    best_state = None
    for epoch in range(1, config.epochs + 1):
        model.train()
        losses = []
        for b, batch in enumerate(make_batches(train_seqs, train_labels, config.batch_size, config.seed, epoch), 1):
            model.zero_grad()
            logits = model.forward(batch.ids, batch.lengths)
            loss, dlogits = softmax_cross_entropy(logits, batch.labels)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}, batch {b}")
            model.backward(dlogits)
            optimizer.step()
            losses.append(loss * len(batch.labels))
        train_loss = float(sum(losses) / len(train_labels))

        live = model.state_dict()
        stored = round_to_float32(live)
        model.load_state_dict(stored)
        dev_pred = predict_logits(model, dev_seqs).argmax(axis=1)
        dev_f1 = evaluate(dev_pred.tolist(), list(dev_labels)).macro_f1
        train_acc = None
        if track_train_accuracy:
            train_pred = predict_logits(model, train_seqs).argmax(axis=1)
            train_acc = float(np.mean(train_pred == np.asarray(train_labels)))
        record = EpochRecord(epoch, train_loss, dev_f1, train_acc)
        report.epochs.append(record)
        logger.info("epoch %d loss %.4f dev macro-F1 %.4f", epoch, train_loss, dev_f1)
        if best_state is None or dev_f1 > report.best_dev_macro_f1:
            best_state = live
            report.best_epoch = epoch
            report.best_dev_macro_f1 = dev_f1
            if on_best is not None:
                on_best(model)
        model.load_state_dict(live)
    model.load_state_dict(best_state)
    model.eval()
    return report
