"""Confusion matrices and class-wise / aggregate precision, recall and F1.

Undefined ratios (0/0) evaluate to 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .corpus import SENTIMENTS, Sentiment

# row order of the published class-wise table
TABLE_ORDER = (Sentiment.POSITIVE, Sentiment.NEGATIVE, Sentiment.NEUTRAL)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_from_pr(precision: float, recall: float) -> float:
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise ValueError("precision and recall must lie in [0, 1]")
    return _ratio(2.0 * precision * recall, precision + recall)


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows gold, columns predicted
    labels: tuple

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index(self, label) -> int:
        return self.labels.index(_coerce(label, self.labels))

    def support(self, label) -> int:
        return int(self.counts[self.index(label)].sum())


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int = 0


def _coerce(label, labels: Sequence):
    if isinstance(labels[0], Sentiment) and not isinstance(label, Sentiment):
        if isinstance(label, (int, np.integer)):
            return labels[int(label)]
        return Sentiment.parse(label)
    return label


def confusion(preds: Sequence[Any], golds: Sequence[Any], labels: Sequence[Any] = SENTIMENTS) -> ConfusionMatrix:
    labels = tuple(labels)
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predictions for {len(golds)} gold labels")
    if len(golds) == 0:
        raise ValueError("cannot evaluate an empty prediction set")
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, g in zip(preds, golds):
        counts[index[_coerce(g, labels)], index[_coerce(p, labels)]] += 1
    return ConfusionMatrix(counts, labels)


def class_prf(cm: ConfusionMatrix, label) -> ClassMetrics:
    i = cm.index(label)
    tp = int(cm.counts[i, i])
    predicted = int(cm.counts[:, i].sum())
    gold = int(cm.counts[i].sum())
    precision = _ratio(tp, predicted)
    recall = _ratio(tp, gold)
    return ClassMetrics(precision, recall, _ratio(2.0 * precision * recall, precision + recall), gold)


def macro_average(f1s: Sequence[float]) -> float:
    return float(sum(f1s) / len(f1s))


def weighted_average(f1s: Sequence[float], supports: Sequence[int]) -> float:
    return _ratio(sum(s * f for f, s in zip(f1s, supports)), sum(supports))


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    per_class: dict

    @property
    def macro_f1(self) -> float:
        return macro_f1(self)

    @property
    def weighted_f1(self) -> float:
        return weighted_f1(self)

    @property
    def accuracy(self) -> float:
        return _ratio(float(np.trace(self.confusion.counts)), self.confusion.total)

    def to_dict(self) -> dict:
        labels = self.confusion.labels
        name = lambda lab: lab.value if isinstance(lab, Sentiment) else str(lab)
        return {
            "labels": [name(lab) for lab in labels],
            "confusion": self.confusion.counts.tolist(),
            "per_class": {
                name(lab): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for lab, m in self.per_class.items()
            },
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "accuracy": self.accuracy,
        }

    def render_table(self) -> str:
        """Plain-text class-wise table (rows Positive/Negative/Neutral)."""
        rows = [lab for lab in TABLE_ORDER if lab in self.per_class] or list(self.per_class)
        lines = [f"{'':<10}{'Precision':>10}{'Recall':>10}{'F1-score':>10}"]
        for lab in rows:
            m = self.per_class[lab]
            title = lab.value.capitalize() if isinstance(lab, Sentiment) else str(lab)
            lines.append(f"{title:<10}{m.precision:>10.3f}{m.recall:>10.3f}{m.f1:>10.3f}")
        lines.append("")
        lines.append(f"macro-F1    {self.macro_f1:.4f}")
        lines.append(f"weighted-F1 {self.weighted_f1:.4f}")
        lines.append(f"accuracy    {self.accuracy:.4f}")
        return "\n".join(lines)


def evaluate(preds: Sequence[Any], golds: Sequence[Any], labels: Sequence[Any] = SENTIMENTS) -> EvalReport:
    cm = confusion(preds, golds, labels)
    return EvalReport(cm, {lab: class_prf(cm, lab) for lab in cm.labels})


def macro_f1(report: EvalReport) -> float:
    return macro_average([m.f1 for m in report.per_class.values()])


def weighted_f1(report: EvalReport) -> float:
    ms = list(report.per_class.values())
    return weighted_average([m.f1 for m in ms], [m.support for m in ms])
