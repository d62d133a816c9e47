import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sxsenti.embeddings import Vocabulary
from sxsenti.gradsuite import TOLERANCE, gradient_suite
from sxsenti.models import (
    MAGIC, BiGRUClassifier, CheckpointError, CnnConfig, GruConfig, TextCNN, build_model, checkpoint_from_bytes,
    checkpoint_to_bytes, load_checkpoint, round_to_float32, save_checkpoint,
)
from sxsenti.nn import grad_check, set_dropout_frozen
from sxsenti.training import pad_sequences

VOCAB = Vocabulary(["<pad>", "<unk>"] + [f"w{i}" for i in range(18)])


def small_cnn(seed=0, **kw):
    return TextCNN(CnnConfig(embedding_dim=6, filters_per_width=4, vocab_size=len(VOCAB), **kw), seed=seed)


def small_gru(seed=0):
    return BiGRUClassifier(GruConfig(embedding_dim=5, hidden=6, vocab_size=len(VOCAB)), seed=seed)


MODELS = [small_cnn, small_gru]


def eval_logits(model, seqs):
    model.eval()
    ids, lengths = pad_sequences(seqs)
    return model.forward(ids, lengths)


@pytest.mark.parametrize("make", MODELS)
def test_logit_shape_and_determinism(make):
    seqs = [[2, 3, 4], [5], [6, 7, 8, 9, 10, 11]]
    out = eval_logits(make(), seqs)
    assert out.shape == (3, 3)
    np.testing.assert_array_equal(out, eval_logits(make(), seqs))
    assert not np.array_equal(out, eval_logits(make(seed=1), seqs))


def test_cnn_rejects_narrow_batch():
    with pytest.raises(ValueError):
        small_cnn().forward(np.array([[2, 3, 4]]), np.array([3]))


def test_embedding_shape_checked():
    with pytest.raises(ValueError):
        TextCNN(CnnConfig(embedding_dim=6, vocab_size=5), embedding=np.zeros((4, 6)))


def test_build_model_kinds():
    assert build_model("cnn", CnnConfig(embedding_dim=4, filters_per_width=2, vocab_size=10)).kind == "cnn"
    with pytest.raises(ValueError):
        build_model("lstm", None)


def test_train_mode_dropout_changes_output():
    model = small_cnn()
    model.train()
    ids, lengths = pad_sequences([[2, 3, 4, 5, 6]] * 4)
    a, b = model.forward(ids, lengths), model.forward(ids, lengths)
    assert not np.array_equal(a, b)
    set_dropout_frozen(model)
    c, d = model.forward(ids, lengths), model.forward(ids, lengths)
    np.testing.assert_array_equal(c, d)


@pytest.mark.parametrize("make", MODELS)
def test_full_model_gradients(make):
    model = make()
    # zero biases put all-padding conv windows exactly on the relu kink
    rng = np.random.default_rng(0)
    for name, p, _ in model.named_parameters():
        if name.endswith("bias"):
            p[...] = rng.uniform(0.1, 0.3, p.shape)
    model.train()
    set_dropout_frozen(model)
    ids, lengths = pad_sequences([[2, 3, 4, 5, 6], [7, 8], [9]])
    assert grad_check(model, [ids, lengths], targets=np.array([0, 2, 1])) < 1e-4


def test_gradient_suite_components():
    results = gradient_suite(seed=0)
    assert set(results) >= {"linear", "conv1d+relu+masked_max", "layer_norm", "gru_cell", "bigru+linear+loss", "cnn_model"}
    assert max(results.values()) < TOLERANCE


# ---- checkpoints ---------------------------------------------------------

@pytest.mark.parametrize("make", MODELS)
def test_checkpoint_round_trip(make, tmp_path):
    model = make()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, model, VOCAB, {"note": "x"})
    assert path.read_bytes()[:8] == MAGIC
    ckpt = load_checkpoint(path, expected_kind=model.kind)
    assert ckpt.vocabulary == VOCAB and ckpt.metadata == {"note": "x"}
    seqs = [[2, 3, 4], [5], [6, 7, 8, 9, 10, 11]]
    before, after = eval_logits(model, seqs), eval_logits(ckpt.model, seqs)
    np.testing.assert_allclose(after, before, atol=1e-6, rtol=0)
    np.testing.assert_array_equal(after.argmax(1), before.argmax(1))
    for name, p in round_to_float32(model.state_dict()).items():
        np.testing.assert_array_equal(ckpt.model.state_dict()[name], p)


def _blob():
    return checkpoint_to_bytes(small_cnn(), VOCAB)


@pytest.mark.parametrize("mutate, message", [
    (lambda b: b"BADMAGIC" + b[8:], "magic"),
    (lambda b: b[:-3], "truncated"),
    (lambda b: b[:20], "truncated"),
    (lambda b: b + b"\0\0\0\0", "trailing"),
    (lambda b: b[:16] + b[16:].replace(b'"format_version": 1', b'"format_version": 9', 1), "version"),
])
def test_checkpoint_corruption(mutate, message):
    with pytest.raises(CheckpointError, match=message):
        checkpoint_from_bytes(mutate(_blob()))


def test_checkpoint_kind_mismatch():
    with pytest.raises(CheckpointError, match="expected gru"):
        checkpoint_from_bytes(_blob(), expected_kind="gru")


def test_checkpoint_vocab_size_must_match():
    with pytest.raises(ValueError):
        checkpoint_to_bytes(small_cnn(), Vocabulary(["<pad>", "<unk>"]))


# ---- padding invariance --------------------------------------------------

_seq = st.lists(st.integers(1, len(VOCAB) - 1), min_size=1, max_size=7)
_CNN, _GRU = small_cnn(seed=3).eval(), small_gru(seed=3).eval()


@pytest.mark.parametrize("model", [_CNN, _GRU], ids=["cnn", "gru"])
@settings(max_examples=100, deadline=None)
@given(seqs=st.lists(_seq, min_size=1, max_size=5), extra=st.integers(0, 6))
def test_eval_logits_batch_padding_invariant(model, seqs, extra):
    batched_ids, lengths = pad_sequences(seqs, min_width=4 + extra)
    batched = model.forward(batched_ids, lengths)
    for i, s in enumerate(seqs):
        alone = model.forward(*pad_sequences([s]))
        np.testing.assert_allclose(batched[i], alone[0], atol=1e-9, rtol=0)
