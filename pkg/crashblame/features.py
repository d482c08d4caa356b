# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Per-frame feature vectors: a tf-idf block for the namespace, one for the
# method, then ten engineered flags and positions.

import os
import re
from dataclasses import dataclass, field
from typing import List

import numpy as np
from sklearn.exceptions import NotFittedError
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from crashblame.errors import ModelFormatError
from crashblame.logger import logger

DEFAULT_DIMENSION = 64

TOKEN_REGEX = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")

EXCEPTION_TOKENS = frozenset(["exception", "throw", "raise", "dispatch", "rethrow"])

ENGINEERED_FEATURES = (
    "is_appname_in_frame",
    "is_first_app_frame",
    "is_kernel_code",
    "is_ntdll_code",
    "is_exception_in_frame",
    "norm_frame_position",
    "is_method_unknown",
    "is_method_empty",
    "is_binary_unknown",
    "is_empty_frame",
)

FIELDS = ("namespace", "method")


def tokenize(identifier):
    """
    Lowercase tokens of an identifier, split on separators, digit runs and
    camelCase humps.

    "OpenAdapter10_2" -> ["open", "adapter", "10", "2"]
    """
    if not identifier:
        return []
    return [token.lower() for token in TOKEN_REGEX.findall(identifier)]


@dataclass
class TfIdfVocab:
    """
    Up to n tokens ranked by document frequency, each with a smoothed idf.
    """

    tokens: List[str] = field(default_factory=list)
    idf: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n: int = DEFAULT_DIMENSION

    def __post_init__(self):
        self.idf = np.asarray(self.idf, dtype=np.float64)
        if len(self.tokens) != len(self.idf) or len(self.tokens) > self.n:
            raise ValueError(
                "vocabulary of %s tokens with %s idf weights does not fit dimension %s"
                % (len(self.tokens), len(self.idf), self.n)
            )

    @property
    def index(self):
        return {token: i for i, token in enumerate(self.tokens)}

    def transform(self, documents):
        """
        Rows of raw tf times idf, L2-normalized, padded to width n.
        """
        matrix = np.zeros((len(documents), self.n))
        if not self.tokens or not documents:
            return matrix
        counter = CountVectorizer(
            vocabulary=self.tokens,
            tokenizer=tokenize,
            lowercase=False,
            token_pattern=None,
        )
        counts = counter.transform(documents).toarray().astype(np.float64)
        matrix[:, : len(self.tokens)] = normalize(counts * self.idf, norm="l2")
        return matrix

    def to_dict(self):
        return {"tokens": list(self.tokens), "idf": [float(v) for v in self.idf], "n": self.n}

    @classmethod
    def from_dict(cls, content):
        return cls(tokens=content["tokens"], idf=content["idf"], n=content["n"])


def fit_tfidf(documents, n=DEFAULT_DIMENSION):
    """
    Fit a vocabulary over field documents (one per frame). Ties in document
    frequency are broken by token so the result never depends on input order.
    """
    if not documents:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    counter = CountVectorizer(
        tokenizer=tokenize, lowercase=False, token_pattern=None, binary=True
    )
    try:
        presence = counter.fit_transform(documents)
    except ValueError:
        # no document has a single token
        return TfIdfVocab(n=n)

    names = counter.get_feature_names_out()
    df = np.asarray(presence.sum(axis=0)).ravel()
    order = sorted(range(len(names)), key=lambda i: (-df[i], names[i]))[:n]
    total = len(documents)
    return TfIdfVocab(
        tokens=[str(names[i]) for i in order],
        idf=[np.log((1 + total) / (1 + df[i])) + 1 for i in order],
        n=n,
    )


def tfidf_vector(tokens, vocab):
    """
    Vector for one already tokenized field.
    """
    index = vocab.index
    vector = np.zeros(vocab.n)
    for token in tokens:
        if token in index:
            vector[index[token]] += vocab.idf[index[token]]
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else vector


def app_name_matches(binary, app):
    """
    True when the binary's base name is the app name, or the app name followed
    by a non-alphanumeric character other than "_".
    """
    if not binary or not app:
        return False
    base = os.path.splitext(binary.lower())[0]
    return re.match(re.escape(app.lower()) + r"(?:[^0-9a-z_]|$)", base) is not None


def engineered_features(stack, app):
    depth = len(stack)
    rows = np.zeros((depth, len(ENGINEERED_FEATURES)))
    first_app = None
    for i, frame in enumerate(stack):
        binary = frame.binary.lower()
        in_app = app_name_matches(frame.binary, app)
        if in_app and first_app is None:
            first_app = i
        rows[i] = [
            in_app,
            0,
            binary.endswith(".sys") or binary == "nt",
            os.path.splitext(binary)[0] == "ntdll",
            bool(EXCEPTION_TOKENS.intersection(tokenize(frame.method))),
            i / (depth - 1) if depth > 1 else 0.0,
            frame.method.lower() == "unknown",
            frame.method == "",
            frame.unknown_binary,
            frame.is_empty,
        ]
    if first_app is not None:
        rows[first_app, 1] = 1
    return rows


class StackFeaturizer:
    """
    Turns crash records into per-frame matrices of width 2n + 10.
    """

    def __init__(self, n=DEFAULT_DIMENSION):
        self.n = n
        self.vocabs = None

    @property
    def width(self):
        return 2 * self.n + len(ENGINEERED_FEATURES)

    @property
    def is_fitted(self):
        return self.vocabs is not None

    def fit(self, corpus):
        frames = [frame for record in corpus for frame in record.stack]
        if not frames:
            raise ValueError("cannot fit a featurizer on an empty corpus")
        self.vocabs = {
            name: fit_tfidf([getattr(f, name) for f in frames], self.n)
            for name in FIELDS
        }
        logger.debug(
            "fitted tf-idf over %s frames: %s namespace and %s method tokens"
            % (
                len(frames),
                len(self.vocabs["namespace"].tokens),
                len(self.vocabs["method"].tokens),
            )
        )
        return self

    def _check_fitted(self):
        if self.vocabs is None:
            raise NotFittedError("StackFeaturizer is not fitted yet, call fit first")

    def transform_record(self, record, app=None):
        return self.transform_stack(record.stack, record.app if app is None else app)

    def transform_stack(self, stack, app):
        self._check_fitted()
        blocks = [
            self.vocabs[name].transform([getattr(f, name) for f in stack])
            for name in FIELDS
        ]
        return np.hstack(blocks + [engineered_features(stack, app)])

    def transform(self, corpus):
        """
        One matrix per record. The tf-idf blocks are computed in one batch.
        """
        self._check_fitted()
        records = list(corpus)
        frames = [frame for record in records for frame in record.stack]
        blocks = [
            self.vocabs[name].transform([getattr(f, name) for f in frames])
            for name in FIELDS
        ]
        tfidf = np.hstack(blocks) if frames else np.zeros((0, 2 * self.n))
        matrices = []
        start = 0
        for record in records:
            end = start + record.depth
            matrices.append(
                np.hstack([tfidf[start:end], engineered_features(record.stack, record.app)])
            )
            start = end
        return matrices

    def feature_names(self):
        self._check_fitted()
        names = []
        for name in FIELDS:
            tokens = self.vocabs[name].tokens
            names.extend("%s %s" % (name, token) for token in tokens)
            names.extend("%s #%s" % (name, i) for i in range(len(tokens), self.n))
        return names + list(ENGINEERED_FEATURES)

    def active_features(self):
        """
        (column, name) pairs of the columns that can be nonzero; padding
        columns of a short vocabulary are left out.
        """
        self._check_fitted()
        columns = []
        offset = 0
        for name in FIELDS:
            tokens = self.vocabs[name].tokens
            columns.extend((offset + i, "%s %s" % (name, t)) for i, t in enumerate(tokens))
            offset += self.n
        columns.extend((offset + i, f) for i, f in enumerate(ENGINEERED_FEATURES))
        return columns

    def to_dict(self):
        self._check_fitted()
        return {"n": self.n, **{name: self.vocabs[name].to_dict() for name in FIELDS}}

    @classmethod
    def from_dict(cls, content):
        try:
            featurizer = cls(n=content["n"])
            featurizer.vocabs = {
                name: TfIdfVocab.from_dict(content[name]) for name in FIELDS
            }
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError("invalid featurizer vocabulary: %s" % e)
        return featurizer

    def same_vocabulary(self, other):
        return self.to_dict() == other.to_dict()


def featurize_stack(record, featurizer, app_name=None):
    """
    Feature matrix of one record, one row per frame.
    """
    return featurizer.transform_record(record, app=app_name)
