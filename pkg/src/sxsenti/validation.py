"""Input validation helpers shared by the estimators."""
from __future__ import annotations

from typing import Any, Iterable, Sequence

import numpy as np

from .corpus import LangTag, Sentiment, SENTIMENTS, Token, Tweet


def check_tweets(X: Any) -> list[Tweet]:
    """Coerce ``X`` into a list of Tweet objects.

    Accepts a Corpus or sequence of Tweet, a sequence of token sequences
    (strings or ``(text, lang)`` pairs), or a sequence of raw strings, which
    are tokenized and tagged ``unk``.
    """
    if isinstance(X, Tweet):
        raise TypeError("expected a collection of tweets, got a single Tweet")
    if isinstance(X, str):
        raise TypeError("expected a collection of tweets, got a string")
    if isinstance(X, np.ndarray):
        X = X.tolist()
    items = list(X)
    out: list[Tweet] = []
    for i, item in enumerate(items):
        if isinstance(item, Tweet):
            out.append(item)
        elif isinstance(item, str):
            from .normalizer import tokenize_raw

            words = tokenize_raw(item)
            if not words:
                raise ValueError(f"sample {i} is empty after tokenization")
            out.append(Tweet(str(i), tuple(Token(w) for w in words)))
        else:
            tokens = [_as_token(t) for t in item]
            if not tokens:
                raise ValueError(f"sample {i} has no tokens")
            out.append(Tweet(str(i), tuple(tokens)))
    return out


def _as_token(t: Any) -> Token:
    if isinstance(t, Token):
        return t
    if isinstance(t, str):
        return Token(t)
    text, lang = t
    return Token(text, LangTag.parse(str(lang)))


def check_labels(y: Iterable[Any] | None, tweets: Sequence[Tweet]) -> list[Sentiment]:
    """Labels as Sentiment values; falls back to the tweets' own labels when ``y`` is None."""
    if y is None:
        labels = [t.sentiment for t in tweets]
        if any(s is None for s in labels):
            raise ValueError("y is required when tweets carry no sentiment")
        return labels
    if isinstance(y, np.ndarray):
        y = y.tolist()
    labels = []
    for v in y:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if not 0 <= v < len(SENTIMENTS):
                raise ValueError(f"label index {v} outside [0, {len(SENTIMENTS)})")
            labels.append(SENTIMENTS[int(v)])
        else:
            labels.append(Sentiment.parse(v))
    if len(labels) != len(tweets):
        raise ValueError(f"X has {len(tweets)} samples but y has {len(labels)}")
    return labels


def check_positive_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_probability(value: float, name: str) -> float:
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {value!r}")
    return float(value)
