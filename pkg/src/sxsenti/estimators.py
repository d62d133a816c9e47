"""scikit-learn style sentiment classifiers.

Both estimators take tweets (a Corpus, Tweet objects, tagged token lists or
raw strings) as ``X`` and sentiment labels as ``y``, normalize the text,
build a vocabulary, initialize embeddings and train a from-scratch network.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.metrics import accuracy_score
from sklearn.utils.validation import check_is_fitted

from .corpus import SENTIMENTS, Corpus
from .embeddings import PretrainedTable, build_vocabulary, init_embedding_matrix, load_embeddings
from .models import (
    BiGRUClassifier,
    CnnConfig,
    GruConfig,
    TextCNN,
    checkpoint_to_bytes,
    load_checkpoint,
)
from .nn import softmax
from .normalizer import TweetNormalizer, UnigramModel
from .training import TrainConfig, TrainReport, fit_epochs, predict_logits
from .validation import check_labels, check_positive_int, check_probability, check_tweets

logger = logging.getLogger(__name__)

CLASSES = np.array([s.value for s in SENTIMENTS])


class _SentimentClassifier(ClassifierMixin, BaseEstimator):
    _kind = ""

    def _network(self, vocab_size: int, embedding: np.ndarray):
        raise NotImplementedError

    def _train_config(self) -> TrainConfig:
        params = {k: v for k, v in self.get_params().items() if k in TrainConfig.__dataclass_fields__}
        return TrainConfig(model=self._kind, **params)

    def _validate_params(self) -> None:
        check_positive_int(self.batch_size, "batch_size")
        check_positive_int(self.epochs, "epochs")
        check_positive_int(self.embedding_dim, "embedding_dim")
        check_probability(self.dropout, "dropout")
        if check_positive_int(self.max_vocab, "max_vocab") < 3:
            raise ValueError("max_vocab must be at least 3")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")

    def _pretrained(self) -> PretrainedTable | None:
        if self.embeddings is None or isinstance(self.embeddings, PretrainedTable):
            return self.embeddings
        return load_embeddings(self.embeddings, expected_dim=self.embedding_dim)

    def fit(self, X, y=None, eval_set=None, checkpoint_path: str | Path | None = None,
            track_train_accuracy: bool = False):
        """Train for ``epochs`` epochs and keep the epoch with the best macro-F1.

        ``eval_set`` is an ``(X_dev, y_dev)`` pair used for epoch selection;
        without it the training data is scored instead. When
        ``checkpoint_path`` is given the best epoch is written there.
        """
        self._validate_params()
        tweets = check_tweets(X)
        labels = [s.index for s in check_labels(y, tweets)]
        if not tweets:
            raise ValueError("cannot fit on an empty dataset")

        self.normalizer_ = TweetNormalizer(self.normalize, self.lang_aware, self.unigrams).fit(tweets)
        docs = self.normalizer_.transform(tweets)
        self.vocabulary_ = build_vocabulary(docs, self.max_vocab)
        table = self._pretrained()
        matrix = init_embedding_matrix(self.vocabulary_, table, self.seed, dim=self.embedding_dim)
        self.network_ = self._network(len(self.vocabulary_), matrix)
        self.classes_ = CLASSES.copy()

        train_seqs = [self.vocabulary_.encode(d) for d in docs]
        if eval_set is not None:
            dev_tweets = check_tweets(eval_set[0])
            dev_labels = [s.index for s in check_labels(eval_set[1] if len(eval_set) > 1 else None, dev_tweets)]
            dev_seqs = self._encode(dev_tweets)
        else:
            dev_seqs, dev_labels = train_seqs, labels

        on_best = None
        if checkpoint_path is not None:
            path = Path(checkpoint_path)
            on_best = lambda model: path.write_bytes(checkpoint_to_bytes(model, self.vocabulary_, self._metadata()))
        self.report_: TrainReport = fit_epochs(
            self.network_, train_seqs, labels, dev_seqs, dev_labels,
            self._train_config(), on_best=on_best, track_train_accuracy=track_train_accuracy,
        )
        if checkpoint_path is not None:
            self.report_.checkpoint = str(checkpoint_path)
        return self

    def _encode(self, tweets) -> list[list[int]]:
        return [self.vocabulary_.encode(d) for d in self.normalizer_.transform(tweets)]

    def decision_function(self, X) -> np.ndarray:
        """Eval-mode logits, one row per tweet in (negative, neutral, positive) order."""
        check_is_fitted(self, "network_")
        seqs = self._encode(check_tweets(X))
        if any(len(s) == 0 for s in seqs):
            raise ValueError("a tweet is empty after normalization")
        return predict_logits(self.network_, seqs)

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        # argmax keeps the first maximum, so ties resolve negative < neutral < positive
        best = self.decision_function(X).argmax(axis=1)
        return self.classes_[best]

    def score(self, X, y=None, sample_weight=None) -> float:
        """Accuracy; ``y`` may be omitted when ``X`` carries gold labels."""
        tweets = check_tweets(X)
        gold = np.array([s.value for s in check_labels(y, tweets)])
        return float(accuracy_score(gold, self.predict(tweets), sample_weight=sample_weight))

    # ------------------------------------------------------------------
    # persistence

    def _metadata(self) -> dict[str, Any]:
        params = {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in self.get_params().items()
            if k not in ("embeddings", "unigrams")
        }
        unigrams = self.normalizer_.unigram_model_
        return {
            "estimator": type(self).__name__,
            "params": params,
            "unigrams": dict(sorted(unigrams.frequency.items())) if unigrams is not None else None,
        }

    def save(self, path: str | Path) -> None:
        check_is_fitted(self, "network_")
        Path(path).write_bytes(checkpoint_to_bytes(self.network_, self.vocabulary_, self._metadata()))

    @classmethod
    def load(cls, path: str | Path) -> "_SentimentClassifier":
        ckpt = load_checkpoint(path, expected_kind=cls._kind or None)
        return _from_checkpoint(ckpt, cls)


class CnnSentimentClassifier(_SentimentClassifier):
    """Single-layer convolutional classifier over word embeddings.

    Defaults reproduce the published setup: filter widths 2, 3 and 4 with
    100 filters each, ReLU, max-over-time pooling, dropout 0.5, Adam at
    1e-3, batch size 64, 5 epochs, a 15000-word vocabulary and 200-d
    embeddings.
    """

    _kind = "cnn"

    def __init__(
        self,
        embedding_dim: int = 200,
        filter_widths=(2, 3, 4),
        filters_per_width: int = 100,
        dropout: float = 0.5,
        max_vocab: int = 15000,
        batch_size: int = 64,
        epochs: int = 5,
        learning_rate: float = 1e-3,
        optimizer: str = "adam",
        weight_decay: float = 0.0,
        normalize: bool = True,
        lang_aware: bool = True,
        unigrams=None,
        embeddings=None,
        seed: int = 0,
    ):
        self.embedding_dim = embedding_dim
        self.filter_widths = filter_widths
        self.filters_per_width = filters_per_width
        self.dropout = dropout
        self.max_vocab = max_vocab
        self.batch_size = batch_size
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.weight_decay = weight_decay
        self.normalize = normalize
        self.lang_aware = lang_aware
        self.unigrams = unigrams
        self.embeddings = embeddings
        self.seed = seed

    def _network(self, vocab_size, embedding):
        config = CnnConfig(
            embedding_dim=self.embedding_dim,
            filter_widths=tuple(self.filter_widths),
            filters_per_width=self.filters_per_width,
            dropout_p=self.dropout,
            vocab_size=vocab_size,
        )
        return TextCNN(config, embedding, seed=self.seed)


class GruSentimentClassifier(_SentimentClassifier):
    """Bidirectional GRU classifier.

    The final forward and backward states are averaged, layer-normalized and
    fed to a dense layer. Defaults: 300-d embeddings, hidden size 512,
    dropout 0.1, AdamW at 1e-3, batch size 256, 10 epochs.
    """

    _kind = "gru"

    def __init__(
        self,
        embedding_dim: int = 300,
        hidden: int = 512,
        dropout: float = 0.1,
        max_vocab: int = 15000,
        batch_size: int = 256,
        epochs: int = 10,
        learning_rate: float = 1e-3,
        optimizer: str = "adamw",
        weight_decay: float = 0.01,
        normalize: bool = True,
        lang_aware: bool = True,
        unigrams=None,
        embeddings=None,
        seed: int = 0,
    ):
        self.embedding_dim = embedding_dim
        self.hidden = hidden
        self.dropout = dropout
        self.max_vocab = max_vocab
        self.batch_size = batch_size
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.weight_decay = weight_decay
        self.normalize = normalize
        self.lang_aware = lang_aware
        self.unigrams = unigrams
        self.embeddings = embeddings
        self.seed = seed

    def _network(self, vocab_size, embedding):
        config = GruConfig(
            embedding_dim=self.embedding_dim,
            hidden=self.hidden,
            dropout_p=self.dropout,
            vocab_size=vocab_size,
        )
        return BiGRUClassifier(config, embedding, seed=self.seed)


ESTIMATORS = {"cnn": CnnSentimentClassifier, "gru": GruSentimentClassifier}


def _from_checkpoint(ckpt, cls=None) -> _SentimentClassifier:
    kind = ckpt.model.kind
    cls = cls if cls is not None and cls._kind else ESTIMATORS[kind]
    meta = ckpt.metadata
    params = dict(meta.get("params", {}))
    est = cls(**{k: v for k, v in params.items() if k in cls._get_param_names()})
    if isinstance(est.__dict__.get("filter_widths"), list):
        est.filter_widths = tuple(est.filter_widths)
    unigrams = UnigramModel(meta["unigrams"]) if meta.get("unigrams") else None
    est.unigrams = None
    est.normalizer_ = TweetNormalizer(est.normalize, est.lang_aware, None)
    est.normalizer_.unigram_model_ = unigrams
    est.vocabulary_ = ckpt.vocabulary
    est.network_ = ckpt.model
    est.network_.eval()
    est.classes_ = CLASSES.copy()
    return est


def load_classifier(path: str | Path) -> _SentimentClassifier:
    """Restore whichever classifier kind a checkpoint holds."""
    return _from_checkpoint(load_checkpoint(path))


def estimator_from_config(config: TrainConfig, embeddings=None, unigrams=None) -> _SentimentClassifier:
    cls = ESTIMATORS[config.model]
    params = {k: v for k, v in config.to_dict().items() if k in cls._get_param_names()}
    if "filter_widths" in params:
        params["filter_widths"] = tuple(params["filter_widths"])
    return cls(**params, embeddings=embeddings, unigrams=unigrams)


def train_loop(train, dev, config: TrainConfig, embeddings=None, checkpoint_path=None, unigrams=None,
               track_train_accuracy: bool = False):
    """Fit the model described by ``config``; returns ``(estimator, report)``."""
    est = estimator_from_config(config, embeddings=embeddings, unigrams=unigrams)
    est.fit(train, eval_set=(dev,) if isinstance(dev, Corpus) else dev,
            checkpoint_path=checkpoint_path, track_train_accuracy=track_train_accuracy)
    return est, est.report_
