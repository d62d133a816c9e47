import numpy as np
import pytest

from sxsenti.corpus import generate_fixture, write_corpus
from sxsenti.normalizer import UnigramModel

UNIGRAM_COUNTS = {
    "love": 500, "my": 800, "life": 300, "good": 400, "god": 50, "nice": 200,
    "hello": 100, "lo": 3, "ve": 2, "great": 250, "day": 600, "happy": 150,
    "best": 120, "friend": 90, "friends": 60, "so": 700, "cool": 80, "mad": 40,
    "soo": 5, "sad": 70, "hate": 65, "mondays": 30, "monday": 45, "the": 1000,
    "a": 900, "i": 950, "is": 850, "he": 300, "hell": 20, "yes": 110, "yess": 1,
}


@pytest.fixture(scope="session")
def unigrams():
    return UnigramModel(UNIGRAM_COUNTS)


@pytest.fixture(scope="session")
def fixture_train():
    return generate_fixture(7, 200)


@pytest.fixture(scope="session")
def fixture_dev():
    return generate_fixture(8, 90)


@pytest.fixture
def corpus_files(tmp_path, fixture_train, fixture_dev):
    train, dev = tmp_path / "train.conll", tmp_path / "dev.conll"
    write_corpus(fixture_train, train)
    write_corpus(fixture_dev, dev)
    return train, dev


def write_embedding_file(path, words, dim, seed=0, header=True):
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(words)} {dim}\n")
        for w in words:
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in rng.uniform(-0.5, 0.5, dim)) + "\n")
    return path


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
