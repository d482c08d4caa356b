# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Fine-tuning a global model against training from scratch on the same K
# target records, for a list of K.

from collections import namedtuple

import crashblame.utils as utils
from crashblame.corpus import temporal_split
from crashblame.errors import UsageError
from crashblame.logger import logger
from crashblame.models import fine_tune, train_model
from crashblame.models.heuristics import train_heuristic
from crashblame.models.sequence import stream

from .base import evaluate

DEFAULT_K_LIST = (0, 100, 500, 1000, 2000, 5000)

# Stream used to order the target training pool
SUBSET_STREAM = 4

CurvePoint = namedtuple("CurvePoint", ["k", "finetune_acc", "scratch_acc"])


def parse_k_list(text):
    """
    "0,100,500" -> [0, 100, 500]
    """
    try:
        ks = [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise UsageError("K values must be integers, got %s" % text)
    if not ks or any(k < 0 for k in ks):
        raise UsageError("K values must be non-negative, got %s" % text)
    return sorted(set(ks))


def nested_subsets(records, ks, seed):
    """
    One shuffled order of records; the subset for K is its first K entries,
    so every smaller subset is contained in every larger one.
    """
    order = stream(seed, SUBSET_STREAM).permutation(len(records))
    shuffled = [records[i] for i in order]
    return {k: shuffled[:k] for k in ks}


def learning_curve(global_bundle, target, k_list=DEFAULT_K_LIST, config=None):
    """
    Split the target corpus in time, then for every K fine-tune the global
    model and train the same kind from scratch on one K-record subset of the
    target training part. Both arms are scored on the target test part. At
    K=0 the scratch arm is the top-frame baseline.
    """
    config = config or global_bundle.config
    target_train, target_test = temporal_split(target)
    pool = target_train.labeled
    ks = sorted(set(k_list))
    if ks and ks[-1] > len(pool):
        raise UsageError(
            "K=%s exceeds the %s labeled target training records" % (ks[-1], len(pool))
        )

    subsets = nested_subsets(pool, ks, config.seed)
    points = []
    for k in ks:
        logger.info("learning curve: K=%s" % k)
        subset = target_train.subset(subsets[k], ":k=%s" % k)
        tuned = fine_tune(global_bundle, subset, config=config)
        if k == 0:
            scratch = train_heuristic("top", subset, config)
        else:
            scratch = train_model(global_bundle.kind, subset, config=config)
        finetune_report, _ = evaluate(tuned, target_test, importance=False)
        scratch_report, _ = evaluate(scratch, target_test, importance=False)
        point = CurvePoint(k, finetune_report.accuracy, scratch_report.accuracy)
        logger.info(
            "K=%s: fine-tuned %.4f, from scratch %.4f"
            % (k, point.finetune_acc, point.scratch_acc)
        )
        points.append(point)
    return points


def write_curve(points, path):
    rows = [(p.k, "%.6f" % p.finetune_acc, "%.6f" % p.scratch_acc) for p in points]
    utils.write_csv(["K", "finetune_acc", "scratch_acc"], rows, path)
    return path
