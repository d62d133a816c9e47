"""Command-line interface: ``sxsenti <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import (
    category_report,
    read_annotations,
    render_category_report,
    run_ablation,
    sample_for_annotation,
    write_annotations,
)
from .corpus import Corpus, Token, Tweet, label_distribution, mode_language_fractions, read_corpus
from .embeddings import load_embeddings
from .estimators import load_classifier, train_loop
from .evaluation import evaluate
from .normalizer import UnigramModel, normalize_tweet, tokenize_raw
from .training import TrainConfig

logger = logging.getLogger("sxsenti")


class CliError(Exception):
    pass


def default_seed() -> int:
    value = os.environ.get("SXSENTI_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise CliError(f"SXSENTI_SEED must be an integer, got {value!r}") from None


# --------------------------------------------------------------------------
# commands


def cmd_stats(args) -> int:
    corpus = read_corpus(args.corpus)
    dist = label_distribution(corpus)
    modes = mode_language_fractions(corpus)
    if args.json:
        print(json.dumps({
            "tweets": len(corpus),
            "labels": dist.to_dict(),
            "mode_language": {k.value: v for k, v in modes.items()},
        }, indent=2))
        return 0
    print(f"tweets: {len(corpus)}")
    print(f"{'sentiment':<10}{'count':>8}{'proportion':>12}")
    for s, n in dist.counts.items():
        print(f"{s.value:<10}{n:>8}{100 * dist.proportions[s]:>11.2f}%")
    print("mode language:")
    for k, v in modes.items():
        print(f"  {k.value:<8}{100 * v:>7.2f}%")
    return 0


def cmd_normalize(args) -> int:
    corpus = read_corpus(args.corpus)
    if args.unigrams:
        unigrams = UnigramModel.load(args.unigrams)
    else:
        unigrams = UnigramModel.from_tokens(t.text for tw in corpus for t in tw.tokens)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for tweet in corpus:
            normalized = normalize_tweet(tweet, unigrams, lang_aware=args.lang_aware)
            out.write(" ".join(t.text for t in normalized.tokens) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _train_config(args) -> TrainConfig:
    overrides = dict(
        model=args.model,
        seed=args.seed if args.seed is not None else default_seed(),
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
    )
    if args.no_normalize:
        overrides["normalize"] = False
    if args.no_lang_aware:
        overrides["lang_aware"] = False
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if args.model is None and "model" in data:
            overrides.pop("model")
        return TrainConfig.from_dict(data, **overrides)
    return TrainConfig.for_model(args.model or "cnn", **{k: v for k, v in overrides.items() if k != "model"})


def _load_inputs(args):
    config = _train_config(args)
    train = read_corpus(args.train)
    dev = read_corpus(args.dev)
    embeddings = load_embeddings(args.embeddings, expected_dim=config.embedding_dim) if args.embeddings else None
    unigrams = UnigramModel.load(args.unigrams) if args.unigrams else None
    return config, train, dev, embeddings, unigrams


def cmd_train(args) -> int:
    config, train, dev, embeddings, unigrams = _load_inputs(args)
    _, report = train_loop(train, dev, config, embeddings=embeddings, checkpoint_path=args.out, unigrams=unigrams)
    payload = {"config": config.to_dict(), **report.to_dict()}
    text = json.dumps(payload, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_ablate(args) -> int:
    config, train, dev, embeddings, unigrams = _load_inputs(args)
    result = run_ablation(train, dev, config, embeddings=embeddings, unigrams=unigrams)
    text = json.dumps(result.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_eval(args) -> int:
    clf = load_classifier(args.checkpoint)
    data = read_corpus(args.data)
    report = evaluate(clf.predict(data).tolist(), data.labels)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.render_table())
    return 0


def cmd_predict(args) -> int:
    clf = load_classifier(args.checkpoint)
    if args.text is not None:
        words = tokenize_raw(args.text)
        if not words:
            raise CliError("--text is empty")
        data = Corpus((Tweet("text", tuple(Token(w) for w in words)),))
    else:
        data = read_corpus(args.data)
    preds = clf.predict(data)
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["Uid", "Sentiment"])
        for tweet, label in zip(data, preds):
            writer.writerow([tweet.uid, label])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_sample(args) -> int:
    clf = load_classifier(args.checkpoint)
    data = read_corpus(args.data)
    seed = args.seed if args.seed is not None else default_seed()
    records = sample_for_annotation(data, clf, n=args.n, seed=seed)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_annotations(records, fh)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_report(args) -> int:
    report = category_report(read_annotations(args.annotations))
    print(json.dumps(report, indent=2) if args.json else render_category_report(report))
    return 0


def cmd_gradcheck(args) -> int:
    from .gradsuite import TOLERANCE, gradient_suite

    failed = False
    for name, err in gradient_suite(seed=args.seed if args.seed is not None else default_seed()).items():
        ok = err < TOLERANCE
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<26} max relative error {err:.3e}")
    return 1 if failed else 0


# --------------------------------------------------------------------------
# parser


def _add_train_flags(p: argparse.ArgumentParser, out_required: bool) -> None:
    p.add_argument("--model", choices=["cnn", "gru"], default=None, help="model kind (default cnn)")
    p.add_argument("--train", required=True, help="training corpus")
    p.add_argument("--dev", required=True, help="development corpus used for epoch selection")
    p.add_argument("--embeddings", help="plain-text pretrained embeddings; omit for random init")
    p.add_argument("--config", help="JSON file of training/model settings")
    p.add_argument("--unigrams", help="'<word> <count>' frequency list for the normalizer")
    p.add_argument("--seed", type=int, default=None, help="random seed (default $SXSENTI_SEED or 0)")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--no-normalize", action="store_true", help="skip text normalization")
    p.add_argument("--no-lang-aware", action="store_true", help="normalize Spanish tokens too")
    p.add_argument("--out", required=out_required, help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sxsenti", description="Code-switched tweet sentiment toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="label and mode-language statistics of a corpus")
    p.add_argument("corpus")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("normalize", help="print normalized tweets, one per line")
    p.add_argument("corpus")
    p.add_argument("--lang-aware", action="store_true", help="leave lang2 tokens untouched")
    p.add_argument("--unigrams")
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("train", help="train a model and write the best-epoch checkpoint")
    _add_train_flags(p, out_required=True)
    p.add_argument("--report", help="also write the training report JSON here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ablate", help="train with and without normalization and compare dev macro-F1")
    _add_train_flags(p, out_required=False)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("eval", help="score a checkpoint on a labelled corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="write Uid,Sentiment predictions")
    p.add_argument("--checkpoint", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--data")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sample", help="stratified sample of predictions for error annotation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("report", help="aggregate an annotated error-analysis TSV")
    p.add_argument("--annotations", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gradcheck", help="finite-difference check of every layer")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        print(f"sxsenti {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
