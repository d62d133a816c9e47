"""Social-media text normalization.

Entity mentions are replaced by descriptive tokens (``<url>``, ``<user>``...),
stylistic patterns are labelled with annotation tokens placed after the word
(``wow <allcaps>``), hashtags are segmented with a unigram model and
out-of-vocabulary words are spell corrected at edit distance 1. Tokens tagged
as Spanish can be left untouched (``lang_aware``).
"""
from __future__ import annotations

import enum
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import LangTag, Token, Tweet
from .validation import check_tweets


class EntityKind(str, enum.Enum):
    URL = "url"
    EMAIL = "email"
    USER = "user"
    HASHTAG = "hashtag"
    PERCENT = "percent"
    MONEY = "money"
    PHONE = "phone"
    TIME = "time"
    DATE = "date"
    NUMBER = "number"

    @property
    def token(self) -> str:
        return f"<{self.value}>"


class StyleAnnotation(str, enum.Enum):
    ALLCAPS = "allcaps"
    ELONGATED = "elongated"
    REPEATED = "repeated"
    EMPHASIZED = "emphasized"
    CENSORED = "censored"

    @property
    def token(self) -> str:
        return f"<{self.value}>"


HASHTAG_OPEN = "<hashtag>"
HASHTAG_CLOSE = "</hashtag>"

ENTITY_TOKENS = frozenset(k.token for k in EntityKind) | {HASHTAG_CLOSE}
ANNOTATION_TOKENS = {a.token: a for a in StyleAnnotation}
_STYLE_ORDER = {a: i for i, a in enumerate(StyleAnnotation)}

# Checked in declaration order; the first full match wins.
_ENTITY_PATTERNS: list[tuple[EntityKind, re.Pattern]] = [
    (EntityKind.URL, re.compile(r"(?:https?://|www\.)\S+", re.I)),
    (EntityKind.EMAIL, re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+")),
    (EntityKind.USER, re.compile(r"@\w+")),
    (EntityKind.HASHTAG, re.compile(r"#\w+")),
    (EntityKind.PERCENT, re.compile(r"[-+]?\d+(?:[.,]\d+)?\s?%")),
    (EntityKind.MONEY, re.compile(r"[$€£¥]\d+(?:[.,]\d+)*|\d+(?:[.,]\d+)*[$€£¥]")),
    (EntityKind.PHONE, re.compile(r"(?:\+\d{1,3}[-.]?)?\(?\d{3}\)?[-.]?\d{3}[-.]\d{4}")),
    (EntityKind.TIME, re.compile(r"\d{1,2}:\d{2}(?::\d{2})?(?:\s?[ap]\.?m\.?)?|\d{1,2}\s?[ap]\.?m\.?", re.I)),
    (EntityKind.DATE, re.compile(r"\d{1,2}[/.-]\d{1,2}[/.-]\d{2,4}|\d{4}[/.-]\d{1,2}[/.-]\d{1,2}")),
    (EntityKind.NUMBER, re.compile(r"[-+]?\d+(?:[.,]\d+)*")),
]

_EMOTICON = re.compile(r"[:;=8xX][-o*']?[)\](\[dDpP/\\|@3*]+|[)\](\[dDpP][-o*']?[:;=]|<3+|</3")
_PROTECTED = [p for k, p in _ENTITY_PATTERNS if k in (EntityKind.URL, EntityKind.EMAIL, EntityKind.USER, EntityKind.HASHTAG)]
_LEADING_PUNCT = re.compile(r"^[^\w\s#@]+")
_TRAILING_PUNCT = re.compile(r"[^\w\s]+$")

_REPEATED_PUNCT = re.compile(r"([^\w\s])\1+")
_EMPHASIZED = re.compile(r"([*_])([^\W\d_]+)\1")
_CENSORED = re.compile(r"[^\W\d_]+(?:\*+[^\W\d_]*)+")
_RUN = re.compile(r"(.)\1{2,}")


@dataclass(frozen=True)
class NormalizedToken:
    surface: str
    annotations: tuple[StyleAnnotation, ...] = ()

    def __post_init__(self):
        anns = sorted(set(self.annotations), key=_STYLE_ORDER.__getitem__)
        object.__setattr__(self, "annotations", tuple(anns))

    def serialize(self) -> list[str]:
        return [self.surface] + [a.token for a in self.annotations]


@dataclass
class UnigramModel:
    frequency: dict[str, int]
    total: int = field(init=False)

    def __post_init__(self):
        bad = [w for w, c in self.frequency.items() if c <= 0]
        if bad:
            raise ValueError(f"non-positive counts for {bad[:3]}")
        self.total = sum(self.frequency.values())
        if self.total <= 0:
            raise ValueError("unigram model needs at least one word")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "UnigramModel":
        return cls(dict(Counter(t.lower() for t in tokens if t.isalpha())))

    @classmethod
    def load(cls, source: str | Path | IO[str]) -> "UnigramModel":
        if isinstance(source, (str, Path)):
            with open(source, encoding="utf-8") as fh:
                return cls.load(fh)
        freq: dict[str, int] = {}
        for lineno, line in enumerate(source, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected '<word> <count>'")
            try:
                count = int(parts[1])
            except ValueError:
                raise ValueError(f"line {lineno}: count {parts[1]!r} is not an integer") from None
            freq[parts[0]] = freq.get(parts[0], 0) + count
        return cls(freq)

    def __contains__(self, word: str) -> bool:
        return word in self.frequency

    def __len__(self) -> int:
        return len(self.frequency)

    def count(self, word: str) -> int:
        return self.frequency.get(word, 0)

    def probability(self, word: str) -> float:
        return self.frequency.get(word, 0) / self.total

    def _segment_logp(self, word: str) -> float:
        c = self.frequency.get(word)
        if c is None:
            return -math.log(self.total * 10)
        return math.log(c) - math.log(self.total)


# --------------------------------------------------------------------------
# single-token operations


def map_entity(token: str) -> EntityKind | None:
    for kind, pattern in _ENTITY_PATTERNS:
        if pattern.fullmatch(token):
            return kind
    return None


def _reduce_elongation(word: str, unigrams: UnigramModel | None) -> str:
    runs = list(_RUN.finditer(word))
    if not runs:
        return word
    best = _RUN.sub(r"\1", word)
    if unigrams is None:
        return best
    best_count = unigrams.count(best.lower())
    # every run tries length 1 then 2; earlier candidates win ties
    for mask in range(1, 2 ** len(runs)):
        pieces, pos = [], 0
        for k, m in enumerate(runs):
            pieces.append(word[pos:m.start()])
            pieces.append(m.group(1) * (2 if mask >> k & 1 else 1))
            pos = m.end()
        pieces.append(word[pos:])
        cand = "".join(pieces)
        c = unigrams.count(cand.lower())
        if c > best_count:
            best, best_count = cand, c
    return best


def annotate_style(token: str, unigrams: UnigramModel | None = None) -> NormalizedToken:
    anns: list[StyleAnnotation] = []
    m = _REPEATED_PUNCT.fullmatch(token)
    if m:
        return NormalizedToken(m.group(1), (StyleAnnotation.REPEATED,))
    m = _EMPHASIZED.fullmatch(token)
    if m:
        token = m.group(2)
        anns.append(StyleAnnotation.EMPHASIZED)
    if _CENSORED.fullmatch(token):
        return NormalizedToken(token, tuple(anns) + (StyleAnnotation.CENSORED,))
    if len(token) >= 2 and token.isalpha() and token.isupper():
        token = token.lower()
        anns.append(StyleAnnotation.ALLCAPS)
    if any(c.isalpha() for c in token) and _RUN.search(token):
        token = _reduce_elongation(token, unigrams)
        anns.append(StyleAnnotation.ELONGATED)
    return NormalizedToken(token, tuple(anns))


def segment_words(compound: str, unigrams: UnigramModel) -> list[str]:
    """Most probable split of ``compound`` under a unigram model (Viterbi over split points)."""
    n = len(compound)
    if n == 0:
        return []
    best = [0.0] + [-math.inf] * n
    back = [0] * (n + 1)
    for end in range(1, n + 1):
        for start in range(end):
            score = best[start] + unigrams._segment_logp(compound[start:end])
            # strict '>' keeps the longest leading segment on ties
            if score > best[end]:
                best[end], back[end] = score, start
    pieces = []
    end = n
    while end > 0:
        pieces.append(compound[back[end]:end])
        end = back[end]
    pieces.reverse()
    whole = unigrams._segment_logp(compound)
    if len(pieces) > 1 and not best[n] > whole:
        return [compound]
    return pieces


def _edits1(word: str, alphabet: str) -> set[str]:
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    deletes = {a + b[1:] for a, b in splits if b}
    replaces = {a + c + b[1:] for a, b in splits if b for c in alphabet if c != b[0]}
    inserts = {a + c + b for a, b in splits for c in alphabet}
    return deletes | replaces | inserts


def spell_correct(word: str, unigrams: UnigramModel | None) -> str:
    """Most frequent known word within one insertion, deletion or substitution."""
    if unigrams is None or word in unigrams:
        return word
    candidates = [w for w in _edits1(word, _alphabet(unigrams)) if w in unigrams]
    if not candidates:
        return word
    return min(candidates, key=lambda w: (-unigrams.count(w), w))


def _alphabet(unigrams: UnigramModel) -> str:
    cached = getattr(unigrams, "_alphabet_cache", None)
    if cached is None:
        cached = "".join(sorted({c for w in unigrams.frequency for c in w}))
        unigrams._alphabet_cache = cached
    return cached


def tokenize_raw(text: str) -> list[str]:
    """Whitespace split plus separation of leading/trailing punctuation runs.

    URLs, emails, mentions, hashtags and emoticons are kept whole.
    """
    out: list[str] = []
    for chunk in text.split():
        out.extend(_split_chunk(chunk))
    return out


def _is_protected(chunk: str) -> bool:
    return bool(_EMOTICON.fullmatch(chunk)) or any(p.fullmatch(chunk) for p in _PROTECTED)


def _split_chunk(chunk: str) -> list[str]:
    if (
        _is_protected(chunk)
        or _REPEATED_PUNCT.fullmatch(chunk)
        or _EMPHASIZED.fullmatch(chunk)
        or _CENSORED.fullmatch(chunk)
    ):
        return [chunk]
    lead = _LEADING_PUNCT.match(chunk)
    lead_s = lead.group(0) if lead else ""
    core = chunk[len(lead_s):]
    trail = _TRAILING_PUNCT.search(core)
    trail_s = trail.group(0) if trail else ""
    core = core[: len(core) - len(trail_s)]
    if not core:
        return [chunk]
    # give symbols back to the core when that completes an entity ($10, 50%)
    while lead_s and map_entity(lead_s[-1] + core):
        core, lead_s = lead_s[-1] + core, lead_s[:-1]
    for k in range(len(trail_s), 0, -1):
        if map_entity(core + trail_s[:k]):
            core, trail_s = core + trail_s[:k], trail_s[k:]
            break
    return [p for p in (lead_s, core, trail_s) if p]


# --------------------------------------------------------------------------
# token-sequence normalization


def _normalize_word(text: str, unigrams: UnigramModel | None) -> NormalizedToken:
    nt = annotate_style(text, unigrams)
    if StyleAnnotation.CENSORED in nt.annotations or not nt.surface.isalpha():
        return nt
    low = nt.surface.lower()
    corrected = spell_correct(low, unigrams)
    # known words keep their casing; case folding happens at vocabulary lookup
    return NormalizedToken(nt.surface if corrected == low else corrected, nt.annotations)


def _hashtag(body: str, unigrams: UnigramModel | None, rewrite: bool) -> list[NormalizedToken]:
    out = [NormalizedToken(HASHTAG_OPEN)]
    for piece in re.findall(r"[^\W\d_]+|\d+", body):
        if piece.isdigit():
            out.append(NormalizedToken(EntityKind.NUMBER.token))
            continue
        if not rewrite:
            out.append(NormalizedToken(piece))
            continue
        parts = segment_words(piece.lower(), unigrams) if unigrams is not None else [piece.lower()]
        out.extend(_normalize_word(p, unigrams) for p in parts)
    out.append(NormalizedToken(HASHTAG_CLOSE))
    return out


def _normalize_tagged(
    tokens: Sequence[Token | tuple[str, str] | str],
    unigrams: UnigramModel | None,
    lang_aware: bool,
) -> list[tuple[NormalizedToken, LangTag]]:
    out: list[tuple[NormalizedToken, LangTag]] = []
    for tok in tokens:
        if isinstance(tok, str):
            tok = Token(tok)
        elif not isinstance(tok, Token):
            tok = Token(tok[0], LangTag.parse(tok[1]))
        text = tok.text
        if text in ANNOTATION_TOKENS:
            prev = out[-1][0] if out else None
            if prev is not None and prev.surface not in ENTITY_TOKENS and prev.surface != HASHTAG_OPEN:
                out[-1] = (NormalizedToken(prev.surface, prev.annotations + (ANNOTATION_TOKENS[text],)), out[-1][1])
            else:
                out.append((NormalizedToken(text), tok.lang))
            continue
        if text in ENTITY_TOKENS:
            out.append((NormalizedToken(text), tok.lang))
            continue
        rewrite = not (lang_aware and tok.lang is LangTag.LANG2)
        kind = map_entity(text)
        if kind is EntityKind.HASHTAG:
            out.extend((nt, tok.lang) for nt in _hashtag(text[1:], unigrams, rewrite))
        elif kind is not None:
            out.append((NormalizedToken(kind.token), tok.lang))
        elif not rewrite:
            out.append((NormalizedToken(text), tok.lang))
        else:
            out.append((_normalize_word(text, unigrams), tok.lang))
    return out


def normalize_tokens(
    tokens: Sequence[Token | tuple[str, str] | str],
    unigrams: UnigramModel | None = None,
    lang_aware: bool = True,
) -> list[NormalizedToken]:
    """Normalize a tagged token sequence.

    Entity mapping is applied to every token. With ``lang_aware`` the style,
    segmentation and spelling steps skip tokens tagged lang2. Annotation
    tokens already present in the input attach to the preceding word, which
    makes the operation idempotent on its own serialized output.
    """
    return [nt for nt, _ in _normalize_tagged(tokens, unigrams, lang_aware)]


def serialize_tokens(tokens: Iterable[NormalizedToken]) -> list[str]:
    return [s for t in tokens for s in t.serialize()]


def normalize_tweet(tweet: Tweet, unigrams: UnigramModel | None = None, lang_aware: bool = True) -> Tweet:
    """Normalized copy of ``tweet``; emitted tokens keep their source token's tag."""
    tokens = tuple(
        Token(s, lang)
        for nt, lang in _normalize_tagged(tweet.tokens, unigrams, lang_aware)
        for s in nt.serialize()
    )
    return Tweet(tweet.uid, tokens, tweet.sentiment)


class TweetNormalizer(TransformerMixin, BaseEstimator):
    """Transformer turning tweets into lists of normalized surface strings.

    Parameters
    ----------
    enabled : bool
        When False the transformer only splits tweets into their raw token
        texts (the no-normalization ablation).
    lang_aware : bool
        Leave tokens tagged lang2 untouched except for entity mapping.
    unigrams : UnigramModel, str or None
        Frequency list for segmentation, elongation and spelling. A path is
        loaded at fit time; None builds a model from the fitted tweets.
    """

    def __init__(self, enabled: bool = True, lang_aware: bool = True, unigrams=None):
        self.enabled = enabled
        self.lang_aware = lang_aware
        self.unigrams = unigrams

    def fit(self, X, y=None):
        tweets = check_tweets(X)
        if isinstance(self.unigrams, UnigramModel):
            self.unigram_model_ = self.unigrams
        elif self.unigrams is not None:
            self.unigram_model_ = UnigramModel.load(self.unigrams)
        else:
            words = [t.text for tw in tweets for t in tw.tokens]
            self.unigram_model_ = UnigramModel.from_tokens(words) if any(w.isalpha() for w in words) else None
        return self

    def transform(self, X) -> list[list[str]]:
        tweets = check_tweets(X)
        if not self.enabled:
            return [[t.text for t in tw.tokens] for tw in tweets]
        model = getattr(self, "unigram_model_", None)
        if model is None and self.unigrams is not None:
            self.fit(tweets)
            model = self.unigram_model_
        return [serialize_tokens(normalize_tokens(tw.tokens, model, self.lang_aware)) for tw in tweets]

    def __sklearn_is_fitted__(self) -> bool:
        return True
