# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Baselines that need no features: blame the top frame, the second frame,
# or the frame whose method was blamed most often in the training data.

from collections import Counter

from crashblame.corpus import corpus_digest

from .bundle import HEURISTIC_KINDS, ModelBundle


def fit_blame_table(corpus):
    """
    Count blamed method keys over the labeled records of corpus.
    """
    counts = Counter(record.blamed_frame.method_key for record in corpus.labeled)
    return dict(sorted(counts.items()))


def predict_heuristic(kind, stack, table=None):
    if not stack:
        raise ValueError("cannot localize an empty stack")
    if kind == "top":
        return 0
    if kind == "second":
        return min(1, len(stack) - 1)
    if kind == "most_freq":
        if table is None:
            raise ValueError("most_freq needs a fitted blame table")
        counts = [table.get(frame.method_key, 0) for frame in stack]
        # all unseen: every frame ties at 0 and the top one wins
        return counts.index(max(counts))
    raise ValueError("%s is not a heuristic, choose from %s" % (kind, HEURISTIC_KINDS))


def train_heuristic(kind, train, config=None):
    if kind not in HEURISTIC_KINDS:
        raise ValueError("%s is not a heuristic" % kind)
    bundle = ModelBundle(kind=kind, corpus_digest=corpus_digest(train))
    if config is not None:
        bundle.config = config
    if kind == "most_freq":
        bundle.blame_table = fit_blame_table(train)
    return bundle
