# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from collections import Counter, namedtuple

import numpy as np

from crashblame.errors import ModelFormatError

ClassAccuracy = namedtuple("ClassAccuracy", ["accuracy", "records"])


def _check_lengths(predictions, truths):
    if len(predictions) != len(truths):
        raise ValueError(
            "%s predictions for %s truths" % (len(predictions), len(truths))
        )
    if not predictions:
        raise ValueError("accuracy needs at least one prediction")


def accuracy(predictions, truths):
    """
    Fraction of stacks whose predicted index is exactly the blamed one.
    """
    _check_lengths(predictions, truths)
    return sum(p == t for p, t in zip(predictions, truths)) / len(truths)


def per_class_accuracy(predictions, truths, classes):
    """
    Accuracy per problem class; classes without records do not appear.
    """
    _check_lengths(predictions, truths)
    if len(classes) != len(truths):
        raise ValueError("%s classes for %s truths" % (len(classes), len(truths)))
    hits = Counter()
    totals = Counter()
    for p, t, name in zip(predictions, truths, classes):
        totals[name] += 1
        hits[name] += p == t
    return {
        name: ClassAccuracy(hits[name] / totals[name], totals[name])
        for name in sorted(totals)
    }


def offset_histogram(predictions, truths):
    """
    Counts of predicted minus true index; 0 is a hit, negative is too high up.
    """
    _check_lengths(predictions, truths)
    return dict(sorted(Counter(p - t for p, t in zip(predictions, truths)).items()))


def improvement_pct(a1, a2):
    """
    Absolute accuracy difference as a percentage of the mean of the two.
    """
    mean = (a1 + a2) / 2
    if mean == 0:
        raise ValueError("improvement is undefined when both accuracies are 0")
    return abs(a1 - a2) / mean * 100


def feature_importance(bundle, all_gates=False):
    """
    Signed importance per input feature, ranked from most positive to most
    negative and scaled so the largest magnitude is 1.

    Logistic regression reports its coefficients. Sequence models report,
    per input feature, the candidate-gate input weights summed over hidden
    units and both directions (all four gates with all_gates).
    """
    if bundle.featurizer is None or not bundle.params:
        raise ModelFormatError("%s model has no fitted feature weights" % bundle.kind)
    if bundle.kind == "logreg":
        weights = bundle.params["logreg.coef"].copy()
    elif bundle.is_sequence:
        weights = np.zeros(bundle.featurizer.width)
        for direction in ("fwd", "bwd"):
            W = bundle.params[direction + ".W"]
            hidden = W.shape[0] // 4
            rows = W if all_gates else W[3 * hidden :]
            weights += rows.sum(axis=0)
    else:
        raise ModelFormatError("%s model has no feature weights" % bundle.kind)

    columns = bundle.featurizer.active_features()
    weights = weights[[column for column, _ in columns]]
    scale = np.abs(weights).max() if weights.size else 0.0
    if scale > 0:
        weights = weights / scale
    rows = [(name, float(w)) for (_, name), w in zip(columns, weights)]
    return sorted(rows, key=lambda row: (-row[1], row[0]))
