#!/usr/bin/python

# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import hashlib
import struct

import numpy as np
import pytest
from conftest import make_record

from crashblame.corpus import Corpus
from crashblame.errors import ModelFormatError, TrainingError
from crashblame.features import StackFeaturizer
from crashblame.models import (
    ModelBundle,
    fine_tune,
    get_localizer,
    load_model,
    predict_blame,
    predict_heuristic,
    predict_index,
    predict_problem_class,
    save_model,
    sequence_loss,
    train_heuristic,
    train_model,
)
from crashblame.models.base import (
    HeuristicLocalizer,
    LogRegLocalizer,
    SequenceLocalizer,
)
from crashblame.models.bundle import CHECKSUM_SIZE, MAGIC, from_bytes, to_bytes
from crashblame.models.sequence import blame_accuracy, init_params, train_sequence_model
from crashblame.nn.config import TrainConfig
from crashblame.nn.gradcheck import grad_check

TINY = TrainConfig(
    hidden_size=6,
    max_epochs=2,
    patience=2,
    batch_size=16,
    tfidf_dim=12,
    learning_rate=0.01,
    seed=1,
)


@pytest.fixture(scope="module")
def train_corpus(small_corpus):
    return small_corpus.subset(small_corpus.records[:160])


@pytest.fixture(scope="module")
def sequence_bundle(train_corpus):
    return train_model("bilstm_crf_attn", train_corpus, config=TINY)


@pytest.fixture(scope="module")
def multitask_bundle(train_corpus):
    return train_model("multitask", train_corpus, config=TINY)


def test_heuristics(sample_corpus):
    stack = sample_corpus[0].stack
    assert predict_heuristic("top", stack) == 0
    assert predict_heuristic("second", stack) == 1
    assert predict_heuristic("second", stack[:1]) == 0

    bundle = train_heuristic("most_freq", sample_corpus)
    assert bundle.blame_table["excel.exe!CopyMemoryBlock"] == 1
    assert predict_index(bundle, sample_corpus[2]) == 2

    unseen = make_record(["x.dll!a", "y.dll!b"])
    assert predict_index(bundle, unseen) == 0
    with pytest.raises(ValueError):
        predict_heuristic("most_freq", stack)
    with pytest.raises(ValueError):
        predict_heuristic("top", ())


def test_train_model_kinds(sample_corpus):
    with pytest.raises(ValueError):
        train_model("deep", sample_corpus)
    assert isinstance(get_localizer(train_model("top", sample_corpus)), HeuristicLocalizer)


def test_logreg(small_corpus):
    bundle = train_model("logreg", small_corpus, config=TINY)
    assert bundle.kind == "logreg"
    assert bundle.params["logreg.coef"].shape == (bundle.featurizer.width,)
    localizer = get_localizer(bundle)
    assert isinstance(localizer, LogRegLocalizer)
    hits = 0
    for record in small_corpus:
        prediction = localizer.predict(record)
        assert 0 <= prediction.index < record.depth
        hits += prediction.index == record.blame_index
    assert hits / len(small_corpus) > 0.4


def test_logreg_c_sets_l2_strength(small_corpus):
    norms = []
    for c in (0.01, 100.0):
        bundle = train_model("logreg", small_corpus, config=TINY.update(logreg_c=c))
        assert bundle.config.logreg_c == c
        norms.append(np.linalg.norm(bundle.params["logreg.coef"]))
    assert norms[0] < norms[1]


def test_logreg_needs_negatives():
    corpus = Corpus([make_record(["a.dll!f"]), make_record(["b.dll!g"])])
    with pytest.raises(TrainingError):
        train_model("logreg", corpus, config=TINY)


@pytest.mark.parametrize("kind", ["bilstm_crf_attn", "multitask"])
def test_sequence_loss_gradients(kind):
    rng = np.random.default_rng(0)
    params = init_params(kind, 5, 3, n_classes=3, seed=4)
    params["crf.A"][:2, :2] = rng.standard_normal((2, 2))
    matrix = rng.standard_normal((4, 5))

    def model(p):
        return sequence_loss(p, matrix, 2, class_index=1, class_weight=0.5)

    assert grad_check(model, params) < 1e-4


def test_sequence_loss_gradients_with_dropout():
    params = init_params("multitask", 4, 2, n_classes=2, seed=1)
    matrix = np.random.default_rng(1).standard_normal((3, 4))

    def model(p):
        # one mask for every evaluation
        rng = np.random.default_rng(11)
        return sequence_loss(p, matrix, 0, 0, 0.5, rate=0.25, rng=rng, train=True)

    assert grad_check(model, params) < 1e-4


def test_multitask_shares_encoder():
    a = init_params("bilstm_crf_attn", 5, 3, seed=2)
    b = init_params("multitask", 5, 3, n_classes=4, seed=2)
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])
    assert b["cls.W"].shape == (4, 6)

    matrix = np.random.default_rng(3).standard_normal((4, 5))
    blame_only, _ = sequence_loss(b, matrix, 1, class_index=None, class_weight=0.5)
    plain, _ = sequence_loss(a, matrix, 1)
    assert blame_only == pytest.approx(plain)
    with_class, _ = sequence_loss(b, matrix, 1, class_index=2, class_weight=0.5)
    assert with_class > blame_only


def test_class_head_is_idle_without_weight():
    a = init_params("bilstm_crf_attn", 5, 3, seed=6)
    b = init_params("multitask", 5, 3, n_classes=3, seed=6)
    matrix = np.random.default_rng(7).standard_normal((5, 5))
    plain_loss, plain = sequence_loss(a, matrix, 3)
    loss, grads = sequence_loss(b, matrix, 3, class_index=1, class_weight=0.0)
    assert loss == pytest.approx(plain_loss)
    assert not grads["cls.W"].any()
    assert not grads["cls.b"].any()
    for name in plain:
        np.testing.assert_allclose(grads[name], plain[name], atol=1e-12)


def test_early_stopping_keeps_best_epoch(small_corpus):
    train = small_corpus.subset(small_corpus.records[:120])
    valid = small_corpus.subset(small_corpus.records[120:180])
    config = TrainConfig(
        hidden_size=4,
        max_epochs=6,
        patience=2,
        batch_size=8,
        tfidf_dim=8,
        learning_rate=0.05,
        seed=3,
    )
    bundle = train_sequence_model("bilstm_crf_attn", train, valid=valid, config=config)
    history = [epoch["valid_accuracy"] for epoch in bundle.history]
    assert 1 <= len(history) <= 6
    matrices = bundle.featurizer.transform(valid.labeled)
    restored = blame_accuracy(bundle.params, matrices, valid.labeled)
    assert restored == max(history)


def test_deepanalyze_alias(multitask_bundle, train_corpus):
    assert ModelBundle(kind="deepanalyze").kind == "multitask"
    bundle = train_model("deepanalyze", train_corpus, config=TINY)
    assert bundle.kind == "multitask"
    assert to_bytes(bundle) == to_bytes(multitask_bundle)


def test_sequence_model(sequence_bundle, train_corpus):
    assert sequence_bundle.kind == "bilstm_crf_attn"
    assert 1 <= len(sequence_bundle.history) <= TINY.max_epochs
    localizer = get_localizer(sequence_bundle)
    assert isinstance(localizer, SequenceLocalizer)
    for record in train_corpus.records[:20]:
        prediction = localizer.predict(record)
        assert 0 <= prediction.index < record.depth
        assert abs(prediction.alpha.sum() - 1) < 1e-6
        assert prediction.fallback is False


def test_sequence_training_is_deterministic(sequence_bundle, train_corpus):
    again = train_model("bilstm_crf_attn", train_corpus, config=TINY)
    assert to_bytes(again) == to_bytes(sequence_bundle)


def test_unconstrained_decoding(sequence_bundle, train_corpus):
    for record in train_corpus.records[:20]:
        prediction = predict_blame(sequence_bundle, record, constrained=False)
        assert 0 <= prediction.index < record.depth


def test_problem_class(multitask_bundle, sequence_bundle, train_corpus):
    record = train_corpus[0]
    name, probs = predict_problem_class(multitask_bundle, record)
    assert name in multitask_bundle.classes
    assert sorted(probs) == sorted(multitask_bundle.classes)
    assert sum(probs.values()) == pytest.approx(1.0)
    assert probs[name] == max(probs.values())
    with pytest.raises(ModelFormatError):
        predict_problem_class(sequence_bundle, record)


def test_save_and_load(tmp_path, multitask_bundle, train_corpus):
    path = str(tmp_path / "model.bin")
    save_model(multitask_bundle, path)
    loaded = load_model(path)
    assert loaded.kind == "multitask"
    assert loaded.classes == multitask_bundle.classes
    assert loaded.config == multitask_bundle.config
    assert to_bytes(loaded) == to_bytes(multitask_bundle)
    for record in train_corpus.records[:10]:
        a = predict_blame(loaded, record)
        b = predict_blame(multitask_bundle, record)
        assert a.index == b.index
        np.testing.assert_array_equal(a.alpha, b.alpha)


def test_heuristic_bundle_round_trip(sample_corpus):
    bundle = train_heuristic("most_freq", sample_corpus)
    loaded = from_bytes(to_bytes(bundle))
    assert loaded.featurizer is None
    assert loaded.blame_table == bundle.blame_table


def test_load_errors(tmp_path, sequence_bundle):
    content = to_bytes(sequence_bundle)
    with pytest.raises(ModelFormatError):
        from_bytes(b"NOTAMODEL" + content[9:])

    corrupt = bytearray(content)
    corrupt[len(MAGIC) + 40] ^= 0xFF
    with pytest.raises(ModelFormatError) as error:
        from_bytes(bytes(corrupt))
    assert "checksum" in str(error.value)

    body = content[:-CHECKSUM_SIZE]
    body = body[: len(MAGIC)] + struct.pack(">H", 99) + body[len(MAGIC) + 2 :]
    with pytest.raises(ModelFormatError) as error:
        from_bytes(body + hashlib.sha256(body).digest())
    assert "version" in str(error.value)

    with pytest.raises(ModelFormatError):
        load_model(str(tmp_path / "missing.bin"))


def test_fine_tune(sequence_bundle, small_corpus):
    target = small_corpus.filter_app("excel")
    same = fine_tune(sequence_bundle, target.subset([]))
    assert same is sequence_bundle

    unconstrained = TINY.update(constrained_decoding=False)
    same = fine_tune(sequence_bundle, target.subset([]), config=unconstrained)
    assert same.config.constrained_decoding is False
    assert same.params is sequence_bundle.params
    assert sequence_bundle.config.constrained_decoding is True

    tuned = fine_tune(sequence_bundle, target.subset(target.records[:40]), config=TINY)
    assert tuned.kind == sequence_bundle.kind
    assert tuned.featurizer.same_vocabulary(sequence_bundle.featurizer)
    assert tuned.params["fwd.W"].shape == sequence_bundle.params["fwd.W"].shape


def test_fine_tune_errors(sequence_bundle, sample_corpus, small_corpus):
    heuristic = train_heuristic("top", sample_corpus)
    with pytest.raises(ModelFormatError):
        fine_tune(heuristic, sample_corpus)

    other = StackFeaturizer(n=TINY.tfidf_dim).fit(sample_corpus)
    with pytest.raises(ModelFormatError):
        fine_tune(sequence_bundle, small_corpus, featurizer=other)
