# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# One interface over every model kind: a localizer wraps a bundle and maps a
# record to its blamed frame index.

from collections import namedtuple

from crashblame.logger import logger
from crashblame.nn.config import TrainConfig

from .bundle import HEURISTIC_KINDS, KINDS, canonical_kind
from .heuristics import predict_heuristic, train_heuristic
from .logreg import predict_logreg, train_logreg
from .sequence import predict_blame, train_sequence_model

Localization = namedtuple("Localization", ["index", "alpha", "fallback"])


class Localizer:
    """
    A localizer picks the blamed frame of a crash record.
    """

    def __init__(self, bundle):
        self.bundle = bundle

    def predict(self, record, app=None):
        raise NotImplementedError

    def __str__(self):
        return "%s[%s]" % (self.__class__.__name__, self.bundle.kind)


class HeuristicLocalizer(Localizer):
    def predict(self, record, app=None):
        index = predict_heuristic(self.bundle.kind, record.stack, self.bundle.blame_table)
        return Localization(index, None, False)


class LogRegLocalizer(Localizer):
    def predict(self, record, app=None):
        return Localization(predict_logreg(self.bundle, record, app=app), None, False)


class SequenceLocalizer(Localizer):
    def __init__(self, bundle, constrained=None):
        super().__init__(bundle)
        self.constrained = constrained

    def predict(self, record, app=None):
        prediction = predict_blame(
            self.bundle, record, app=app, constrained=self.constrained
        )
        return Localization(*prediction)


def get_localizer(bundle, constrained=None):
    if bundle.kind in HEURISTIC_KINDS:
        return HeuristicLocalizer(bundle)
    if bundle.kind == "logreg":
        return LogRegLocalizer(bundle)
    return SequenceLocalizer(bundle, constrained=constrained)


def predict_index(bundle, record, app=None):
    return get_localizer(bundle).predict(record, app=app).index


def train_model(kind, train, config=None, valid=None):
    """
    Fit any model kind on a training corpus.
    """
    config = config or TrainConfig()
    kind = canonical_kind(kind)
    if kind not in KINDS:
        raise ValueError("unknown model kind %s, choose from %s" % (kind, ", ".join(KINDS)))
    logger.info("training %s on %s records" % (kind, len(train)))
    if kind in HEURISTIC_KINDS:
        return train_heuristic(kind, train, config)
    if kind == "logreg":
        return train_logreg(train, config)
    return train_sequence_model(kind, train, valid=valid, config=config)
