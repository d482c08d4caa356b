#!/usr/bin/python

# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import os

import numpy as np
import pytest

from crashblame.corpus import temporal_split
from crashblame.errors import ModelFormatError, UsageError
from crashblame.experiment import (
    accuracy,
    evaluate,
    feature_importance,
    improvement_pct,
    learning_curve,
    load_prediction_log,
    log_accuracy,
    offset_histogram,
    parse_k_list,
    per_class_accuracy,
    write_curve,
    write_report,
)
from crashblame.experiment.curve import nested_subsets
from crashblame.features import StackFeaturizer
from crashblame.models import ModelBundle, train_heuristic, train_model
from crashblame.nn.config import TrainConfig

TINY = TrainConfig(
    hidden_size=5,
    max_epochs=2,
    patience=2,
    batch_size=16,
    tfidf_dim=10,
    learning_rate=0.01,
    seed=2,
)


@pytest.fixture(scope="module")
def global_bundle(small_corpus):
    others = small_corpus.filter_app("excel", keep=False)
    return train_model("bilstm_crf_attn", others.subset(others.records[:150]), config=TINY)


def test_accuracy():
    assert accuracy([0, 1, 2, 3], [0, 1, 0, 0]) == 0.5
    assert accuracy([1, 1], [1, 1]) == 1.0
    with pytest.raises(ValueError):
        accuracy([0], [0, 1])
    with pytest.raises(ValueError):
        accuracy([], [])


def test_per_class_accuracy():
    rng = np.random.default_rng(0)
    truths = rng.integers(0, 5, 20).tolist()
    predicted = rng.integers(0, 5, 20).tolist()
    classes = [["A", "B", "C"][i % 3] for i in range(20)]
    table = per_class_accuracy(predicted, truths, classes)
    assert sum(row.records for row in table.values()) == 20
    weighted = sum(row.accuracy * row.records for row in table.values()) / 20
    assert abs(weighted - accuracy(predicted, truths)) < 1e-12

    table = per_class_accuracy([0, 0, 1, 1], [0, 0, 0, 0], ["A", "A", "B", "B"])
    assert table["A"].accuracy == 1.0
    assert table["B"].accuracy == 0.0
    assert list(per_class_accuracy([0], [0], ["X"])) == ["X"]


def test_offset_histogram():
    assert offset_histogram([0, 0, 3, 1], [0, 2, 1, 1]) == {-2: 1, 0: 2, 2: 1}


def test_improvement_pct():
    assert improvement_pct(0.90, 0.77) == pytest.approx(15.57, abs=0.01)
    assert improvement_pct(0.77, 0.90) == improvement_pct(0.90, 0.77)
    assert improvement_pct(0.5, 0.5) == 0.0
    with pytest.raises(ValueError):
        improvement_pct(0.0, 0.0)


def test_logreg_importance(sample_corpus):
    featurizer = StackFeaturizer(n=6).fit(sample_corpus)
    columns = featurizer.active_features()
    coef = np.zeros(featurizer.width)
    coef[columns[0][0]] = 2.0
    coef[columns[-1][0]] = -1.0
    bundle = ModelBundle(
        kind="logreg",
        params={"logreg.coef": coef, "logreg.intercept": np.zeros(1)},
        featurizer=featurizer,
    )
    ranked = feature_importance(bundle)
    assert len(ranked) == len(columns)
    assert ranked[0] == (columns[0][1], 1.0)
    assert ranked[-1] == (columns[-1][1], -0.5)

    with pytest.raises(ModelFormatError):
        feature_importance(train_heuristic("top", sample_corpus))


def test_sequence_importance(global_bundle):
    ranked = feature_importance(global_bundle)
    values = [value for _, value in ranked]
    assert max(abs(v) for v in values) == pytest.approx(1.0)
    assert values == sorted(values, reverse=True)
    names = [name for name, _ in ranked]
    assert "is_first_app_frame" in names
    assert not any("#" in name for name in names)

    all_gates = feature_importance(global_bundle, all_gates=True)
    assert len(all_gates) == len(ranked)


def test_evaluate_heuristic(tmp_path, sample_corpus):
    bundle = train_heuristic("top", sample_corpus)
    report, log = evaluate(bundle, sample_corpus)
    assert report.accuracy == 0.5
    assert report.records == 4
    assert report.offsets == {-2: 1, -1: 1, 0: 2}
    assert report.per_class["HEAP_CORRUPTION"].accuracy == 0.0
    assert report.per_class["INVALID_POINTER_READ"].accuracy == 1.0
    assert report.fallback_rate is None
    assert report.importance == []
    assert log_accuracy(log) == report.accuracy
    assert all(entry["alpha"] is None for entry in log)
    assert all(len(entry["hash"]) == 16 for entry in log)

    written = write_report(report, log, str(tmp_path))
    assert sorted(os.path.basename(p) for p in written) == [
        "importance.csv",
        "offsets.csv",
        "per_class.csv",
        "predictions.jsonl",
        "report.csv",
        "summary.txt",
    ]
    assert load_prediction_log(str(tmp_path / "predictions.jsonl")) == log
    summary = (tmp_path / "summary.txt").read_text()
    assert "accuracy: 0.5000" in summary
    assert report.log_digest in summary

    log[0]["predicted_index"] = 3
    with pytest.raises(ModelFormatError):
        write_report(report, log, str(tmp_path / "other"))


def test_evaluate_sequence(tmp_path, global_bundle, small_corpus):
    test = small_corpus.filter_app("excel")
    report, log = evaluate(global_bundle, test)
    assert len(log) == len(test)
    assert log_accuracy(log) == pytest.approx(report.accuracy)
    assert report.fallback_rate == 0.0
    for entry, record in zip(log, test):
        assert len(entry["alpha"]) == record.depth
        assert sum(entry["alpha"]) == pytest.approx(1.0)
    assert report.importance
    assert report.config["hidden_size"] == 5

    again, _ = evaluate(global_bundle, test)
    assert again.to_json() == report.to_json()

    write_report(report, log, str(tmp_path))
    lines = (tmp_path / "importance.csv").read_text().splitlines()
    assert lines[0] == "feature,importance"


def test_parse_k_list():
    assert parse_k_list("100,0,500") == [0, 100, 500]
    with pytest.raises(UsageError):
        parse_k_list("a,b")
    with pytest.raises(UsageError):
        parse_k_list("-1")
    with pytest.raises(UsageError):
        parse_k_list("")


def test_nested_subsets():
    records = list(range(50))
    subsets = nested_subsets(records, [0, 10, 30], seed=3)
    assert subsets[0] == []
    assert subsets[30][:10] == subsets[10]
    assert nested_subsets(records, [10], seed=3)[10] == subsets[10]


def test_learning_curve(tmp_path, global_bundle, small_corpus):
    target = small_corpus.filter_app("excel")
    points = learning_curve(global_bundle, target, [20, 0], TINY)
    assert [p.k for p in points] == [0, 20]

    _, test = temporal_split(target)
    transfer, _ = evaluate(global_bundle, test, importance=False)
    baseline, _ = evaluate(train_heuristic("top", test), test, importance=False)
    assert points[0].finetune_acc == transfer.accuracy
    assert points[0].scratch_acc == baseline.accuracy
    for point in points:
        assert 0 <= point.finetune_acc <= 1
        assert 0 <= point.scratch_acc <= 1

    path = write_curve(points, str(tmp_path / "curve.csv"))
    lines = open(path).read().splitlines()
    assert lines[0] == "K,finetune_acc,scratch_acc"
    assert lines[1].startswith("0,")

    with pytest.raises(UsageError):
        learning_curve(global_bundle, target, [len(target)], TINY)


def test_learning_curve_unconstrained_start(global_bundle, small_corpus):
    target = small_corpus.filter_app("excel")
    config = TINY.update(constrained_decoding=False)
    points = learning_curve(global_bundle, target, [0], config)
    _, test = temporal_split(target)
    transfer, _ = evaluate(global_bundle, test, constrained=False, importance=False)
    assert points[0].finetune_acc == transfer.accuracy
