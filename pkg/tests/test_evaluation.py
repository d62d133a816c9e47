import random

import numpy as np
import pytest

from sxsenti.corpus import SENTIMENTS, Sentiment
from sxsenti.evaluation import (
    class_prf, confusion, evaluate, f1_from_pr, macro_average, macro_f1, weighted_average, weighted_f1,
)

from metric_oracle import LABELS, count_matrix, scores


def random_pairs(n, seed):
    rnd = random.Random(seed)
    return [rnd.choice(LABELS) for _ in range(n)], [rnd.choice(LABELS) for _ in range(n)]


@pytest.mark.parametrize("seed", range(5))
def test_matches_brute_force(seed):
    preds, golds = random_pairs(1000, seed)
    cm = confusion(preds, golds)
    assert cm.counts.tolist() == count_matrix(preds, golds)
    per_class, macro, weighted = scores(preds, golds)
    for lab in LABELS:
        m = class_prf(cm, lab)
        assert (m.precision, m.recall, m.f1) == pytest.approx(per_class[lab][:3], abs=1e-12)
        assert m.support == per_class[lab][3]
    report = evaluate(preds, golds)
    assert macro_f1(report) == pytest.approx(macro, abs=1e-12)
    assert weighted_f1(report) == pytest.approx(weighted, abs=1e-12)


def test_published_arithmetic():
    assert f1_from_pr(0.807, 0.647) == pytest.approx(0.7182, abs=1e-4)
    assert macro_average([0.794, 0.445, 0.136]) == pytest.approx(0.458, abs=1e-3)


def test_perfect_predictions():
    golds = ["positive", "negative", "neutral", "neutral"]
    report = evaluate(golds, golds)
    assert report.macro_f1 == report.weighted_f1 == report.accuracy == 1.0


def test_absent_class_scores_zero():
    report = evaluate(["positive", "positive"], ["positive", "neutral"])
    neg = report.per_class[Sentiment.NEGATIVE]
    assert (neg.precision, neg.recall, neg.f1) == (0.0, 0.0, 0.0)
    assert f1_from_pr(0.0, 0.0) == 0.0


def test_label_forms_are_interchangeable():
    a = confusion([0, 2, 1], ["negative", "positive", "positive"])
    b = confusion([Sentiment.NEGATIVE, "POSITIVE", Sentiment.NEUTRAL], [0, 2, 2])
    np.testing.assert_array_equal(a.counts, b.counts)


def test_generic_labels():
    report = evaluate(["a", "b", "b"], ["a", "a", "b"], labels=["a", "b"])
    assert report.confusion.counts.tolist() == [[1, 1], [0, 1]]
    assert report.to_dict()["labels"] == ["a", "b"]


def test_errors():
    with pytest.raises(ValueError):
        confusion(["positive"], [])
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError):
        f1_from_pr(1.5, 0.2)


def test_weighted_average_and_table():
    assert weighted_average([1.0, 0.0], [3, 1]) == 0.75
    text = evaluate(["positive", "negative"], ["positive", "neutral"]).render_table()
    rows = [line.split()[0] for line in text.splitlines()[1:4]]
    assert rows == ["Positive", "Negative", "Neutral"]
    assert "macro-F1" in text


def test_report_dict_round_numbers():
    d = evaluate(["positive", "negative", "neutral"], ["positive", "negative", "negative"]).to_dict()
    assert d["labels"] == [s.value for s in SENTIMENTS]
    assert d["per_class"]["negative"] == {"precision": 1.0, "recall": 0.5, "f1": pytest.approx(2 / 3), "support": 2}
    assert d["accuracy"] == pytest.approx(2 / 3)
