"""CNN and bidirectional-GRU sentence classifiers plus checkpoint I/O.

Checkpoint layout::

    b"SXSENTI1"                      8-byte magic
    uint64 little-endian             manifest length in bytes
    UTF-8 JSON manifest              kind, config, vocabulary, tensor table
    float32 little-endian tensors    concatenated in manifest order
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .embeddings import OOV_INIT_RANGE, Vocabulary
from .nn import BiGRU, Conv1d, Dropout, Embedding, Layer, LayerNorm, Linear, MaskedMaxPool, ReLU

MAGIC = b"SXSENTI1"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class CnnConfig:
    embedding_dim: int = 200
    filter_widths: tuple[int, ...] = (2, 3, 4)
    filters_per_width: int = 100
    dropout_p: float = 0.5
    classes: int = 3
    vocab_size: int = 15000

    def __post_init__(self):
        self.filter_widths = tuple(int(w) for w in self.filter_widths)
        if not self.filter_widths or any(w < 1 for w in self.filter_widths):
            raise ValueError("filter widths must be positive")
        if any(a >= b for a, b in zip(self.filter_widths, self.filter_widths[1:])):
            raise ValueError("filter widths must be strictly increasing")
        for name in ("embedding_dim", "filters_per_width", "classes", "vocab_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class GruConfig:
    embedding_dim: int = 300
    hidden: int = 512
    dropout_p: float = 0.1
    classes: int = 3
    vocab_size: int = 15000

    def __post_init__(self):
        for name in ("embedding_dim", "hidden", "classes", "vocab_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


def _random_embedding(rng: np.random.Generator, vocab_size: int, dim: int) -> np.ndarray:
    weight = rng.uniform(-OOV_INIT_RANGE, OOV_INIT_RANGE, size=(vocab_size, dim))
    weight[0] = 0.0
    return weight


class _Classifier(Layer):
    kind = ""

    def __init__(self, config, embedding: np.ndarray | None, seed: int):
        super().__init__()
        self.config = config
        init_seq, dropout_seq = np.random.SeedSequence(seed).spawn(2)
        self._init_rng = np.random.default_rng(init_seq)
        self._dropout_rng = np.random.default_rng(dropout_seq)
        if embedding is None:
            embedding = _random_embedding(self._init_rng, config.vocab_size, config.embedding_dim)
        if embedding.shape != (config.vocab_size, config.embedding_dim):
            raise ValueError(
                f"embedding matrix {embedding.shape} does not match "
                f"({config.vocab_size}, {config.embedding_dim})"
            )
        self.embedding = Embedding(np.array(embedding, dtype=np.float64))

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.copy() for name, p, _ in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = {name: p for name, p, _ in self.named_parameters()}
        if set(params) != set(state):
            raise ValueError(f"state keys differ: {sorted(set(params) ^ set(state))}")
        for name, p in params.items():
            if p.shape != state[name].shape:
                raise ValueError(f"shape mismatch for {name}: {state[name].shape} != {p.shape}")
            p[...] = state[name]


class TextCNN(_Classifier):
    """embed -> {conv_w -> relu -> masked max-pool} -> concat -> dropout -> linear."""

    kind = "cnn"

    def __init__(self, config: CnnConfig, embedding: np.ndarray | None = None, seed: int = 0):
        super().__init__(config, embedding, seed)
        rng = self._init_rng
        d, nf = config.embedding_dim, config.filters_per_width
        self.convs = [Conv1d(nf, w, d, rng) for w in config.filter_widths]
        self.relus = [ReLU() for _ in config.filter_widths]
        self.pools = [MaskedMaxPool() for _ in config.filter_widths]
        self.dropout = Dropout(config.dropout_p, self._dropout_rng)
        self.fc = Linear(nf * len(config.filter_widths), config.classes, rng)

    @property
    def min_length(self) -> int:
        return max(self.config.filter_widths)

    def forward(self, ids, lengths):
        ids = np.asarray(ids)
        lengths = np.asarray(lengths, dtype=np.int64)
        if ids.shape[1] < self.min_length:
            raise ValueError(f"batch width {ids.shape[1]} is shorter than the widest filter {self.min_length}")
        # short tweets are padded up to the widest filter and pooled over that span
        span = np.maximum(lengths, self.min_length)
        emb = self.embedding(ids)
        feats = [
            pool(relu(conv(emb)), span - conv.width + 1)
            for conv, relu, pool in zip(self.convs, self.relus, self.pools)
        ]
        return self.fc(self.dropout(np.concatenate(feats, axis=1)))

    def backward(self, dlogits):
        dfeat = self.dropout.backward(self.fc.backward(dlogits))
        nf = self.config.filters_per_width
        demb = 0.0
        for k, (conv, relu, pool) in enumerate(zip(self.convs, self.relus, self.pools)):
            demb = demb + conv.backward(relu.backward(pool.backward(dfeat[:, k * nf:(k + 1) * nf])))
        self.embedding.backward(demb)
        return None


class BiGRUClassifier(_Classifier):
    """embed -> dropout -> BiGRU (mean of final states) -> layer norm -> dropout -> linear."""

    kind = "gru"

    def __init__(self, config: GruConfig, embedding: np.ndarray | None = None, seed: int = 0):
        super().__init__(config, embedding, seed)
        rng = self._init_rng
        self.embed_dropout = Dropout(config.dropout_p, self._dropout_rng)
        self.encoder = BiGRU(config.embedding_dim, config.hidden, rng)
        self.norm = LayerNorm(config.hidden)
        self.out_dropout = Dropout(config.dropout_p, self._dropout_rng)
        self.fc = Linear(config.hidden, config.classes, rng)

    min_length = 1

    def forward(self, ids, lengths):
        emb = self.embed_dropout(self.embedding(np.asarray(ids)))
        h = self.encoder(emb, lengths)
        return self.fc(self.out_dropout(self.norm(h)))

    def backward(self, dlogits):
        dh = self.norm.backward(self.out_dropout.backward(self.fc.backward(dlogits)))
        demb = self.embed_dropout.backward(self.encoder.backward(dh))
        self.embedding.backward(demb)
        return None


MODEL_TYPES: dict[str, tuple[type, type]] = {
    "cnn": (TextCNN, CnnConfig),
    "gru": (BiGRUClassifier, GruConfig),
}


def build_model(kind: str, config, embedding: np.ndarray | None = None, seed: int = 0) -> _Classifier:
    try:
        cls, _ = MODEL_TYPES[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}") from None
    return cls(config, embedding, seed)


# --------------------------------------------------------------------------
# checkpoints


@dataclass
class Checkpoint:
    model: _Classifier
    vocabulary: Vocabulary
    metadata: dict[str, Any] = field(default_factory=dict)


def _config_to_dict(config) -> dict:
    d = asdict(config)
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = list(v)
    return d


def checkpoint_to_bytes(model: _Classifier, vocabulary: Vocabulary, metadata: dict | None = None) -> bytes:
    if len(vocabulary) != model.config.vocab_size:
        raise ValueError(f"vocabulary size {len(vocabulary)} != model vocab_size {model.config.vocab_size}")
    params = model.named_parameters()
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "config": _config_to_dict(model.config),
        "vocabulary": vocabulary.words,
        "tensors": [{"name": name, "shape": list(p.shape)} for name, p, _ in params],
        "metadata": metadata or {},
    }
    blob = json.dumps(manifest, ensure_ascii=False, sort_keys=True).encode("utf-8")
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<Q", len(blob)))
    out.write(blob)
    for _, p, _ in params:
        out.write(np.ascontiguousarray(p, dtype="<f4").tobytes())
    return out.getvalue()


def checkpoint_from_bytes(data: bytes, expected_kind: str | None = None) -> Checkpoint:
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (size,) = struct.unpack_from("<Q", data, len(MAGIC))
    start = len(MAGIC) + 8
    if start + size > len(data):
        raise CheckpointError("truncated manifest")
    try:
        manifest = json.loads(data[start:start + size].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt manifest: {exc}") from None
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('format_version')!r}")
    kind = manifest.get("kind")
    if kind not in MODEL_TYPES:
        raise CheckpointError(f"unknown model kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise CheckpointError(f"checkpoint holds a {kind} model, expected {expected_kind}")
    _, config_cls = MODEL_TYPES[kind]
    known = {f.name for f in fields(config_cls)}
    try:
        config = config_cls(**{k: v for k, v in manifest["config"].items() if k in known})
        vocabulary = Vocabulary(manifest["vocabulary"])
        model = build_model(kind, config, seed=0)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"invalid manifest: {exc}") from None

    expected = [(name, p.shape) for name, p, _ in model.named_parameters()]
    table = [(t["name"], tuple(t["shape"])) for t in manifest["tensors"]]
    if table != expected:
        raise CheckpointError("tensor table does not match the configured model shapes")
    offset = start + size
    state = {}
    for name, shape in table:
        n = int(np.prod(shape)) * 4
        if offset + n > len(data):
            raise CheckpointError(f"truncated tensor data at {name}")
        state[name] = np.frombuffer(data, dtype="<f4", count=n // 4, offset=offset).reshape(shape).astype(np.float64)
        offset += n
    if offset != len(data):
        raise CheckpointError(f"{len(data) - offset} trailing bytes after tensor data")
    model.load_state_dict(state)
    return Checkpoint(model, vocabulary, manifest.get("metadata", {}))


def save_checkpoint(path: str | Path, model: _Classifier, vocabulary: Vocabulary, metadata: dict | None = None) -> None:
    Path(path).write_bytes(checkpoint_to_bytes(model, vocabulary, metadata))


def load_checkpoint(path: str | Path, expected_kind: str | None = None) -> Checkpoint:
    return checkpoint_from_bytes(Path(path).read_bytes(), expected_kind)


def round_to_float32(state: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Parameters exactly as a checkpoint stores them."""
    return {k: v.astype(np.float32).astype(np.float64) for k, v in state.items()}
