"""Normalization ablation and error-analysis sampling/reporting.

Error categories are assigned by hand: ``sample_for_annotation`` writes a TSV
with an empty ``category`` column, a person fills it in, and
``category_report`` aggregates the result.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable

from .corpus import SENTIMENTS, Corpus, Sentiment, stratified_sample
from .evaluation import confusion, evaluate
from .training import TrainConfig

ANNOTATION_FIELDS = ("uid", "text", "gold", "predicted", "category", "note")


class ErrorCategory(str, enum.Enum):
    DIFFICULT = "difficult"
    NEGATIVE_TENDENCY = "negative_tendency"
    ADVERTISING = "advertising"
    AMBIGUOUS_LABEL = "ambiguous_label"
    DOUBTFUL_LABEL = "doubtful_label"


@dataclass(frozen=True)
class AnnotationRecord:
    uid: str
    text: str
    gold: Sentiment
    predicted: Sentiment
    category: ErrorCategory | None = None
    note: str = ""

    @property
    def correct(self) -> bool:
        return self.gold is self.predicted


class AnnotationError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


# --------------------------------------------------------------------------
# ablation


@dataclass
class AblationResult:
    config: TrainConfig
    with_normalization: dict
    without_normalization: dict

    @property
    def delta(self) -> float:
        return self.with_normalization["macro_f1"] - self.without_normalization["macro_f1"]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "with_normalization": self.with_normalization,
            "without_normalization": self.without_normalization,
            "macro_f1_with": self.with_normalization["macro_f1"],
            "macro_f1_without": self.without_normalization["macro_f1"],
            "delta": self.delta,
        }


def ablation_configs(config: TrainConfig) -> tuple[TrainConfig, TrainConfig]:
    """Two configs identical except for the normalization flag."""
    return replace(config, normalize=True), replace(config, normalize=False)


def run_ablation(train: Corpus, dev: Corpus, config: TrainConfig, embeddings=None, unigrams=None) -> AblationResult:
    from .estimators import train_loop

    results = []
    for cfg in ablation_configs(config):
        est, report = train_loop(train, dev, cfg, embeddings=embeddings, unigrams=unigrams)
        scores = evaluate(est.predict(dev).tolist(), dev.labels)
        results.append({**scores.to_dict(), "best_epoch": report.best_epoch, "losses": report.losses})
    return AblationResult(config, results[0], results[1])


# --------------------------------------------------------------------------
# annotation files


def sample_for_annotation(dev: Corpus, model, n: int = 300, seed: int = 0) -> list[AnnotationRecord]:
    if n > len(dev):
        raise ValueError(f"sample size {n} exceeds the {len(dev)} available tweets")
    sample = stratified_sample(dev, n, seed)
    preds = model.predict(sample)
    return [
        AnnotationRecord(t.uid, t.text, t.sentiment, Sentiment.parse(p))
        for t, p in zip(sample, preds)
    ]


def write_annotations(records: Iterable[AnnotationRecord], stream: IO[str] | None = None) -> str | None:
    out = stream if stream is not None else io.StringIO()
    writer = csv.writer(out, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(ANNOTATION_FIELDS)
    for r in records:
        writer.writerow([
            r.uid, r.text, r.gold.value, r.predicted.value,
            r.category.value if r.category else "", r.note,
        ])
    return out.getvalue() if stream is None else None


def read_annotations(source: str | Path | IO[str]) -> list[AnnotationRecord]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_annotations(fh)
    reader = csv.reader(source, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != ANNOTATION_FIELDS:
        raise AnnotationError(f"expected header {'/'.join(ANNOTATION_FIELDS)}", 1)
    records = []
    for row in reader:
        lineno = reader.line_num
        if not row:
            continue
        if len(row) == len(ANNOTATION_FIELDS) - 1:
            row = row + [""]
        if len(row) != len(ANNOTATION_FIELDS):
            raise AnnotationError(f"expected {len(ANNOTATION_FIELDS)} columns, got {len(row)}", lineno)
        uid, text, gold, pred, cat, note = row
        try:
            gold_s, pred_s = Sentiment.parse(gold), Sentiment.parse(pred)
        except ValueError:
            raise AnnotationError(f"invalid sentiment in {gold!r}/{pred!r}", lineno) from None
        category = None
        if cat.strip():
            try:
                category = ErrorCategory(cat.strip().lower())
            except ValueError:
                raise AnnotationError(f"invalid category {cat!r}", lineno) from None
        records.append(AnnotationRecord(uid, text, gold_s, pred_s, category, note))
    return records


def category_report(records: Iterable[AnnotationRecord]) -> dict:
    """Counts, accuracy and confusion matrix per category, plus overall totals."""
    records = list(records)
    per_category = {}
    for cat in ErrorCategory:
        rows = [r for r in records if r.category is cat]
        if not rows:
            per_category[cat.value] = {"count": 0, "accuracy": 0.0, "confusion": None}
            continue
        cm = confusion([r.predicted for r in rows], [r.gold for r in rows])
        per_category[cat.value] = {
            "count": len(rows),
            "accuracy": sum(r.correct for r in rows) / len(rows),
            "confusion": cm.counts.tolist(),
        }
    return {
        "labels": [s.value for s in SENTIMENTS],
        "total": len(records),
        "uncategorized": sum(r.category is None for r in records),
        "accuracy": sum(r.correct for r in records) / len(records) if records else 0.0,
        "categories": per_category,
    }


def render_category_report(report: dict) -> str:
    lines = [f"{'category':<20}{'count':>7}{'accuracy':>10}"]
    for name, row in report["categories"].items():
        lines.append(f"{name:<20}{row['count']:>7}{row['accuracy']:>10.3f}")
    lines.append(f"{'(uncategorized)':<20}{report['uncategorized']:>7}")
    lines.append(f"{'total':<20}{report['total']:>7}{report['accuracy']:>10.3f}")
    return "\n".join(lines)
