# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Per-frame logistic regression: every frame is an example, blamed frames are
# positives, and a stack is localized at its highest scoring frame.
#
# The fit minimizes the class-weighted log-loss plus sklearn's L2 penalty of
# strength 1/logreg_c (default 1.0). A very large logreg_c approaches the
# unpenalized log-loss.

import numpy as np
from sklearn.linear_model import LogisticRegression

from crashblame.corpus import corpus_digest
from crashblame.errors import ModelFormatError, TrainingError
from crashblame.features import StackFeaturizer
from crashblame.logger import log_duration, logger
from crashblame.nn.config import TrainConfig

from .bundle import ModelBundle


def frame_examples(matrices, records):
    """
    Stack per-record matrices into (X, y) with y = 1 on blamed frames.
    """
    X = np.vstack(matrices)
    y = np.zeros(X.shape[0], dtype=int)
    start = 0
    for matrix, record in zip(matrices, records):
        y[start + record.blame_index] = 1
        start += matrix.shape[0]
    return X, y


@log_duration("logistic regression training")
def train_logreg(train, config=None, featurizer=None):
    config = config or TrainConfig()
    records = train.labeled
    if not records:
        raise TrainingError("logistic regression needs labeled training records")
    if featurizer is None:
        featurizer = StackFeaturizer(n=config.tfidf_dim).fit(train)

    X, y = frame_examples(featurizer.transform(records), records)
    positives = int(y.sum())
    negatives = len(y) - positives
    if negatives == 0:
        # every stack has depth 1, so no frame is ever a negative example
        raise TrainingError("logistic regression needs both blamed and unblamed frames")

    model = LogisticRegression(
        C=config.logreg_c,
        max_iter=config.logreg_max_iter,
        class_weight={0: 1.0, 1: negatives / positives},
    )
    model.fit(X, y)
    logger.info(
        "logistic regression fitted on %s frames (%s blamed)" % (len(y), positives)
    )
    return ModelBundle(
        kind="logreg",
        params={
            "logreg.coef": model.coef_.ravel().astype(np.float64),
            "logreg.intercept": model.intercept_.astype(np.float64),
        },
        featurizer=featurizer,
        config=config,
        corpus_digest=corpus_digest(train),
    )


def logreg_scores(bundle, matrix):
    """
    Per-frame logits. The logit is monotone in the blame probability.
    """
    if bundle.kind != "logreg":
        raise ModelFormatError("expected a logreg model, got %s" % bundle.kind)
    return matrix @ bundle.params["logreg.coef"] + bundle.params["logreg.intercept"][0]


def predict_logreg(bundle, record, app=None):
    matrix = bundle.featurizer.transform_record(record, app=app)
    return int(np.argmax(logreg_scores(bundle, matrix)))
