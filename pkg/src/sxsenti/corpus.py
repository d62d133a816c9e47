"""Corpus ingestion for code-switched tweets.

The on-disk format is CoNLL-like: records separated by a blank line, the
first line of a record is ``meta<TAB>uid<TAB>sentiment`` and each following
line is ``token<TAB>langtag``.
"""
from __future__ import annotations

import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np


class LangTag(str, enum.Enum):
    LANG1 = "lang1"  # English
    LANG2 = "lang2"  # Spanish
    OTHER = "other"
    NE = "ne"
    AMBIGUOUS = "ambiguous"
    MIXED = "mixed"
    FW = "fw"
    UNK = "unk"

    @classmethod
    def parse(cls, value: str) -> "LangTag":
        """Map a raw tag to a LangTag; anything unrecognised becomes ``unk``."""
        try:
            return cls(value.strip().lower())
        except ValueError:
            return cls.UNK


class Sentiment(str, enum.Enum):
    # Declaration order is the class-index order used everywhere.
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    @classmethod
    def parse(cls, value: "str | Sentiment") -> "Sentiment":
        if isinstance(value, Sentiment):
            return value
        return cls(str(value).strip().lower())

    @property
    def index(self) -> int:
        return SENTIMENTS.index(self)


SENTIMENTS: tuple[Sentiment, ...] = tuple(Sentiment)

# Train split counts from the SentiMix Spanglish release.
TRAIN_LABEL_COUNTS: dict[Sentiment, int] = {
    Sentiment.NEGATIVE: 2023,
    Sentiment.NEUTRAL: 3974,
    Sentiment.POSITIVE: 6005,
}


class CorpusParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    text: str
    lang: LangTag = LangTag.UNK

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if any(c in self.text for c in "\t\n\r"):
            raise ValueError(f"token text contains tab or newline: {self.text!r}")
        if not isinstance(self.lang, LangTag):
            object.__setattr__(self, "lang", LangTag.parse(str(self.lang)))


@dataclass(frozen=True)
class Tweet:
    uid: str
    tokens: tuple[Token, ...]
    sentiment: Sentiment | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError(f"tweet {self.uid!r} has no tokens")
        if self.sentiment is not None and not isinstance(self.sentiment, Sentiment):
            object.__setattr__(self, "sentiment", Sentiment.parse(self.sentiment))

    @property
    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)

    @property
    def langs(self) -> list[LangTag]:
        return [t.lang for t in self.tokens]


@dataclass(frozen=True)
class Corpus(Sequence[Tweet]):
    tweets: tuple[Tweet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tweets", tuple(self.tweets))
        seen = set()
        for tweet in self.tweets:
            if tweet.uid in seen:
                raise ValueError(f"duplicate uid {tweet.uid!r}")
            seen.add(tweet.uid)

    def __len__(self) -> int:
        return len(self.tweets)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Corpus(self.tweets[i])
        return self.tweets[i]

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    @property
    def labels(self) -> list[Sentiment | None]:
        return [t.sentiment for t in self.tweets]


@dataclass(frozen=True)
class LabelDistribution:
    counts: dict[Sentiment, int]
    proportions: dict[Sentiment, float] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {
            s.value: {"count": self.counts[s], "proportion": self.proportions[s]}
            for s in SENTIMENTS
        }


# --------------------------------------------------------------------------
# parsing / serialization


def parse_conll(stream: IO[str] | Iterable[str]) -> Corpus:
    tweets: list[Tweet] = []
    seen: set[str] = set()
    header: tuple[str, Sentiment, int] | None = None
    tokens: list[Token] = []

    def flush(lineno: int):
        nonlocal header, tokens
        if header is None:
            return
        uid, sentiment, start = header
        if not tokens:
            raise CorpusParseError(f"record {uid!r} has no tokens", start)
        tweets.append(Tweet(uid, tuple(tokens), sentiment))
        header, tokens = None, []

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush(lineno)
            continue
        fields = line.split("\t")
        if header is None:
            if fields[0] != "meta" or len(fields) != 3:
                raise CorpusParseError(f"expected 'meta<TAB>uid<TAB>sentiment', got {line!r}", lineno)
            uid = fields[1].strip()
            if not uid:
                raise CorpusParseError("empty uid", lineno)
            if uid in seen:
                raise CorpusParseError(f"duplicate uid {uid!r}", lineno)
            try:
                sentiment = Sentiment.parse(fields[2])
            except ValueError:
                raise CorpusParseError(f"unknown sentiment {fields[2]!r}", lineno) from None
            seen.add(uid)
            header = (uid, sentiment, lineno)
            continue
        if len(fields) != 2 or not fields[0]:
            raise CorpusParseError(f"expected 'token<TAB>langtag', got {line!r}", lineno)
        tokens.append(Token(fields[0], LangTag.parse(fields[1])))
    flush(lineno)
    return Corpus(tuple(tweets))


def read_corpus(path: str | Path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_conll(fh)


def serialize_conll(corpus: Iterable[Tweet], stream: IO[str] | None = None) -> str | None:
    """Write ``corpus`` in the record format; return the text if no stream is given."""
    out = stream if stream is not None else io.StringIO()
    for tweet in corpus:
        if tweet.sentiment is None:
            raise ValueError(f"tweet {tweet.uid!r} has no sentiment to serialize")
        out.write(f"meta\t{tweet.uid}\t{tweet.sentiment.value}\n")
        for tok in tweet.tokens:
            out.write(f"{tok.text}\t{tok.lang.value}\n")
        out.write("\n")
    if stream is None:
        return out.getvalue()
    return None


def write_corpus(corpus: Iterable[Tweet], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        serialize_conll(corpus, fh)


# --------------------------------------------------------------------------
# statistics


def label_distribution(corpus: Iterable[Tweet]) -> LabelDistribution:
    counter = Counter(t.sentiment for t in corpus)
    total = sum(counter.values())
    if total == 0:
        raise ValueError("label distribution of an empty corpus is undefined")
    counts = {s: counter.get(s, 0) for s in SENTIMENTS}
    return LabelDistribution(counts, {s: counts[s] / total for s in SENTIMENTS})


def mode_language(tweet: Tweet) -> LangTag:
    """Majority of lang1/lang2 over the tokens; ``mixed`` on a tie, ``other`` if neither occurs."""
    n_en = sum(t.lang is LangTag.LANG1 for t in tweet.tokens)
    n_es = sum(t.lang is LangTag.LANG2 for t in tweet.tokens)
    if n_en == 0 and n_es == 0:
        return LangTag.OTHER
    if n_en == n_es:
        return LangTag.MIXED
    return LangTag.LANG1 if n_en > n_es else LangTag.LANG2


def mode_language_fractions(corpus: Iterable[Tweet]) -> dict[LangTag, float]:
    modes = Counter(mode_language(t) for t in corpus)
    total = sum(modes.values())
    if total == 0:
        raise ValueError("empty corpus")
    keys = (LangTag.LANG2, LangTag.LANG1, LangTag.MIXED, LangTag.OTHER)
    return {k: modes.get(k, 0) / total for k in keys}


# --------------------------------------------------------------------------
# sampling


def largest_remainder(n: int, weights: Mapping[Sentiment, int | float | Fraction]) -> dict[Sentiment, int]:
    """Apportion ``n`` seats across ``weights``.

    Seats are floored first; leftovers go to the largest fractional remainders,
    ties resolved by class order.
    """
    keys = [s for s in SENTIMENTS if s in weights]
    total = sum(Fraction(weights[k]) for k in keys)
    if total <= 0:
        raise ValueError("weights must have a positive sum")
    exact = {k: Fraction(weights[k]) * n / total for k in keys}
    quotas = {k: int(exact[k]) for k in keys}
    leftover = n - sum(quotas.values())
    order = sorted(keys, key=lambda k: (-(exact[k] - quotas[k]), SENTIMENTS.index(k)))
    for k in order[:leftover]:
        quotas[k] += 1
    return quotas


def stratified_sample(corpus: Corpus, n: int, seed: int) -> Corpus:
    if n < 1:
        raise ValueError("sample size must be positive")
    if n > len(corpus):
        raise ValueError(f"sample size {n} exceeds corpus size {len(corpus)}")
    by_class: dict[Sentiment, list[int]] = {s: [] for s in SENTIMENTS}
    for i, tweet in enumerate(corpus):
        by_class[tweet.sentiment].append(i)
    quotas = largest_remainder(n, {s: len(ix) for s, ix in by_class.items()})
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for s in SENTIMENTS:
        pool = by_class[s]
        if quotas[s]:
            picked = rng.choice(len(pool), size=quotas[s], replace=False)
            chosen.extend(pool[j] for j in picked)
    order = rng.permutation(len(chosen))
    return Corpus(tuple(corpus[chosen[j]] for j in order))


# --------------------------------------------------------------------------
# synthetic fixture

# Cue words are disjoint across classes and never appear as filler.
_CUES: dict[Sentiment, list[tuple[str, LangTag]]] = {
    Sentiment.POSITIVE: [
        ("feliz", LangTag.LANG2), ("genial", LangTag.LANG2), ("amor", LangTag.LANG2),
        ("bonito", LangTag.LANG2), ("love", LangTag.LANG1), ("awesome", LangTag.LANG1),
        ("happy", LangTag.LANG1), ("great", LangTag.LANG1),
    ],
    Sentiment.NEGATIVE: [
        ("odio", LangTag.LANG2), ("triste", LangTag.LANG2), ("horrible", LangTag.LANG2),
        ("enojada", LangTag.LANG2), ("hate", LangTag.LANG1), ("awful", LangTag.LANG1),
        ("sad", LangTag.LANG1), ("worst", LangTag.LANG1),
    ],
    Sentiment.NEUTRAL: [
        ("mañana", LangTag.LANG2), ("clase", LangTag.LANG2), ("tarea", LangTag.LANG2),
        ("camión", LangTag.LANG2), ("tomorrow", LangTag.LANG1), ("meeting", LangTag.LANG1),
        ("store", LangTag.LANG1), ("schedule", LangTag.LANG1),
    ],
}

_FILLER: list[tuple[str, LangTag]] = [
    ("yo", LangTag.LANG2), ("que", LangTag.LANG2), ("la", LangTag.LANG2), ("el", LangTag.LANG2),
    ("con", LangTag.LANG2), ("pero", LangTag.LANG2), ("hoy", LangTag.LANG2), ("mi", LangTag.LANG2),
    ("casa", LangTag.LANG2), ("es", LangTag.LANG2), ("muy", LangTag.LANG2), ("jajaja", LangTag.LANG2),
    ("the", LangTag.LANG1), ("and", LangTag.LANG1), ("my", LangTag.LANG1), ("day", LangTag.LANG1),
    ("so", LangTag.LANG1), ("is", LangTag.LANG1), ("lol", LangTag.LANG1), ("like", LangTag.LANG1),
    ("@amiga", LangTag.OTHER), ("!", LangTag.OTHER), ("...", LangTag.OTHER), ("Maria", LangTag.NE),
]


def cue_words(sentiment: Sentiment) -> list[str]:
    return [w for w, _ in _CUES[Sentiment.parse(sentiment)]]


def generate_fixture(seed: int, n: int) -> Corpus:
    """Deterministic synthetic corpus whose classes are separable by cue words.

    Label counts follow the SentiMix train proportions under largest-remainder
    apportionment.
    """
    if n < 3:
        raise ValueError("fixture needs at least 3 tweets")
    rng = np.random.default_rng(seed)
    quotas = largest_remainder(n, TRAIN_LABEL_COUNTS)
    labels = [s for s in SENTIMENTS for _ in range(quotas[s])]
    labels = [labels[i] for i in rng.permutation(n)]
    tweets = []
    for i, label in enumerate(labels):
        n_fill = int(rng.integers(2, 9))
        n_cue = int(rng.integers(1, 3))
        words = [_FILLER[j] for j in rng.integers(0, len(_FILLER), size=n_fill)]
        # at least one filler from each language keeps every tweet code-switched
        words.append(_FILLER[int(rng.integers(0, 12))])
        words.append(_FILLER[int(rng.integers(12, 20))])
        cues = _CUES[label]
        for j in rng.integers(0, len(cues), size=n_cue):
            words.insert(int(rng.integers(0, len(words) + 1)), cues[j])
        tokens = tuple(Token(w, tag) for w, tag in words)
        tweets.append(Tweet(f"fx{seed}-{i:05d}", tokens, label))
    return Corpus(tuple(tweets))
