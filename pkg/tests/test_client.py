#!/usr/bin/python

# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import json
import os

import pytest

import crashblame
from crashblame.client import run
from crashblame.corpus import load_corpus
from crashblame.experiment import load_prediction_log
from crashblame.models import load_model

here = os.path.abspath(os.path.dirname(__file__))
configs_dir = os.path.join(os.path.dirname(here), "configs")

TINY_YAML = """hidden_size: 4
max_epochs: 1
patience: 1
batch_size: 32
tfidf_dim: 8
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """
    A generated corpus split in time, shared by the tests below.
    """
    root = tmp_path_factory.mktemp("client")
    corpus = str(root / "corpus.jsonl")
    assert run(["generate", "--records", "240", "--seed", "5", "--out", corpus]) == 0
    code = run(
        [
            "split",
            "--corpus",
            corpus,
            "--train-out",
            str(root / "train.jsonl"),
            "--test-out",
            str(root / "test.jsonl"),
        ]
    )
    assert code == 0
    (root / "tiny.yaml").write_text(TINY_YAML)
    return root


def test_no_arguments_prints_help(capsys):
    assert run([]) == 0
    assert "crashblame" in capsys.readouterr().out


def test_version(capsys):
    assert run(["version"]) == 0
    assert capsys.readouterr().out.strip() == crashblame.__version__
    assert run(["--version"]) == 0


def test_usage_errors(tmp_path):
    assert run(["train", "--unknown"]) == 1
    assert run(["train", "--kind", "deep", "--train", "x", "--out", "y"]) == 1
    missing = str(tmp_path / "missing.jsonl")
    assert run(["analyze", "--corpus", missing, "--out", str(tmp_path)]) == 1


def test_generate_is_deterministic(tmp_path):
    first = str(tmp_path / "a.jsonl")
    second = str(tmp_path / "b.jsonl")
    for path in (first, second):
        assert run(["generate", "--records", "50", "--seed", "9", "--out", path]) == 0
    with open(first) as a, open(second) as b:
        assert a.read() == b.read()
    assert len(load_corpus(first)) == 50


def test_split(workdir):
    train = load_corpus(str(workdir / "train.jsonl"))
    test = load_corpus(str(workdir / "test.jsonl"))
    assert len(train) > len(test) > 0
    assert max(r.timestamp for r in train) <= min(r.timestamp for r in test)


def test_split_by_app(workdir, tmp_path):
    args = [
        "split",
        "--corpus",
        str(workdir / "corpus.jsonl"),
        "--train-out",
        str(tmp_path / "train.jsonl"),
        "--test-out",
        str(tmp_path / "test.jsonl"),
        "--app",
        "excel",
    ]
    assert run(args) == 0
    assert load_corpus(str(tmp_path / "train.jsonl")).apps == ["excel"]
    assert run(args + ["--exclude-app", "excel"]) == 1


def test_split_writes_nothing_on_failure(workdir, tmp_path):
    (tmp_path / "test.jsonl").mkdir()
    args = [
        "split",
        "--corpus",
        str(workdir / "corpus.jsonl"),
        "--train-out",
        str(tmp_path / "train.jsonl"),
        "--test-out",
        str(tmp_path / "test.jsonl"),
    ]
    assert run(args) == 1
    assert sorted(os.listdir(str(tmp_path))) == ["test.jsonl"]


def test_analyze(workdir, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CRASHBLAME_OUTDIR", str(tmp_path))
    assert run(["analyze", "--corpus", str(workdir / "corpus.jsonl")]) == 0
    assert "top-frame blame share" in capsys.readouterr().out
    assert (tmp_path / "depth.csv").exists()
    assert (tmp_path / "blame_ratio.csv").exists()

    monkeypatch.delenv("CRASHBLAME_OUTDIR")
    assert run(["analyze", "--corpus", str(workdir / "corpus.jsonl")]) == 1


def test_train_eval_predict(workdir, tmp_path, capsys):
    model = str(tmp_path / "logreg.bin")
    train = str(workdir / "train.jsonl")
    test = str(workdir / "test.jsonl")
    assert run(["train", "--kind", "logreg", "--train", train, "--out", model]) == 0
    assert os.path.exists(model)

    outdir = tmp_path / "report"
    assert run(["eval", "--model", model, "--test", test, "--out", str(outdir)]) == 0
    assert "accuracy:" in capsys.readouterr().out
    log = load_prediction_log(str(outdir / "predictions.jsonl"))
    assert len(log) == len(load_corpus(test))
    assert run(["validate", str(outdir / "predictions.jsonl"), "--format", "predictions"]) == 0

    stack = "ntdll.dll!RtlpHeapHandleError;excel.exe!CopyMemoryBlock;excel.exe!RecalcSheet"
    assert run(["predict", "--model", model, "--stack", stack, "--app", "excel"]) == 0
    assert capsys.readouterr().out.startswith("blamed frame ")

    assert run(["predict", "--model", model, "--stack", stack, "--json"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert 0 <= result["index"] < 3
    assert result["alpha"] is None

    assert run(["predict", "--model", model, "--stack", " ; "]) == 1


def test_sequence_commands(workdir, tmp_path, capsys):
    model = str(tmp_path / "multitask.bin")
    train = str(workdir / "train.jsonl")
    config = str(workdir / "tiny.yaml")
    args = ["train", "--kind", "multitask", "--train", train, "--out", model]
    assert run(args + ["--config", config, "--seed", "1"]) == 0

    stack_file = tmp_path / "stack.txt"
    stack_file.write_text("kernelbase.dll!RaiseException\nmsedge.dll!gpu::Flush\n")
    assert run(["predict", "--model", model, "--stack-file", str(stack_file)]) == 0
    out = capsys.readouterr().out
    assert "problem class:" in out
    assert len([line for line in out.splitlines() if line.startswith("*")]) == 1

    tuned = str(tmp_path / "tuned.bin")
    target = str(workdir / "test.jsonl")
    finetune = ["finetune", "--model", model, "--train", target, "--k", "10", "--out", tuned]
    assert run(finetune + ["--config", config]) == 0
    assert os.path.exists(tuned)
    assert run(finetune[:-2] + ["--k", "100000", "--out", tuned]) == 1


def test_train_deepanalyze_alias(workdir, tmp_path):
    train = str(workdir / "train.jsonl")
    config = str(workdir / "tiny.yaml")
    paths = []
    for kind in ("deepanalyze", "multitask"):
        path = str(tmp_path / ("%s.bin" % kind))
        args = ["train", "--kind", kind, "--train", train, "--out", path]
        assert run(args + ["--config", config, "--seed", "1"]) == 0
        paths.append(path)
    assert load_model(paths[0]).kind == "multitask"
    with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
        assert a.read() == b.read()


def test_validate(workdir, tmp_path):
    assert run(["validate", str(workdir / "corpus.jsonl")]) == 0
    assert run(["validate", str(workdir / "tiny.yaml"), "--format", "train"]) == 0

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"stack": []}\n')
    assert run(["validate", str(bad)]) == 2

    config = tmp_path / "bad.yaml"
    config.write_text("dropout: 1.5\n")
    assert run(["validate", str(config), "--format", "train"]) == 2


@pytest.mark.parametrize(
    "name,kind",
    [("train-small.yaml", "train"), ("generator-two-apps.yaml", "generator")],
)
def test_shipped_configs(name, kind):
    assert run(["validate", os.path.join(configs_dir, name), "--format", kind]) == 0


def test_generate_from_config(tmp_path):
    out = str(tmp_path / "two-apps.jsonl")
    config = os.path.join(configs_dir, "generator-two-apps.yaml")
    assert run(["generate", "--config", config, "--records", "60", "--out", out]) == 0
    assert load_corpus(out).apps == ["browser", "sheet"]
