"""Sentiment classification for Spanish-English code-switched tweets."""
from .corpus import (
    Corpus,
    LangTag,
    Sentiment,
    Token,
    Tweet,
    generate_fixture,
    label_distribution,
    mode_language,
    parse_conll,
    read_corpus,
    stratified_sample,
)
from .embeddings import Vocabulary, build_vocabulary, init_embedding_matrix, load_embeddings
from .estimators import CnnSentimentClassifier, GruSentimentClassifier, load_classifier, train_loop
from .evaluation import evaluate, f1_from_pr
from .normalizer import TweetNormalizer, UnigramModel, normalize_tokens
from .training import TrainConfig

__version__ = "0.1.0"

__all__ = [
    "CnnSentimentClassifier", "Corpus", "GruSentimentClassifier", "LangTag", "Sentiment",
    "Token", "TrainConfig", "Tweet", "TweetNormalizer", "UnigramModel", "Vocabulary",
    "build_vocabulary", "evaluate", "f1_from_pr", "generate_fixture", "init_embedding_matrix",
    "label_distribution", "load_classifier", "load_embeddings", "mode_language",
    "normalize_tokens", "parse_conll", "read_corpus", "stratified_sample", "train_loop",
]
