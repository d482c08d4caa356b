# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Crash records, corpora, and the record-per-line corpus file format.

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import jsonschema

import crashblame.utils as utils
from crashblame.errors import CorpusFormatError, InvalidRecordError
from crashblame.logger import logger
from crashblame.schemas import record_schema

from .frame import Frame, parse_frame

MAX_DEPTH = 255
DEFAULT_TRAIN_FRACTION = 11 / 14

# Keys in the order they are written, for byte-stable output
RECORD_KEYS = ("stack", "blame_index", "problem_class", "app", "ts")


@dataclass(frozen=True)
class CrashRecord:
    """
    One crash: ordered frames (index 0 is the top of the stack) and labels.
    """

    stack: Tuple[Frame, ...]
    problem_class: str
    app: str
    timestamp: int = 0
    blame_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "stack", tuple(self.stack))
        if not 1 <= len(self.stack) <= MAX_DEPTH:
            raise InvalidRecordError(
                "stack depth must be in [1, %s], got %s" % (MAX_DEPTH, len(self.stack))
            )
        if self.blame_index is not None and not 0 <= self.blame_index < len(self.stack):
            raise InvalidRecordError(
                "blame_index %s is outside a stack of depth %s"
                % (self.blame_index, len(self.stack))
            )

    @classmethod
    def from_frames(cls, frames, problem_class, app, timestamp=0, blame_index=None):
        """
        Build a record from frame strings.
        """
        stack = [f if isinstance(f, Frame) else parse_frame(f) for f in frames]
        return cls(
            stack=stack,
            problem_class=problem_class,
            app=app,
            timestamp=timestamp,
            blame_index=blame_index,
        )

    @property
    def depth(self):
        return len(self.stack)

    @property
    def blamed_frame(self):
        if self.blame_index is None:
            return None
        return self.stack[self.blame_index]

    @property
    def dedup_hash(self):
        return record_hash(self)

    def to_dict(self):
        content = {"stack": [frame.raw for frame in self.stack]}
        if self.blame_index is not None:
            content["blame_index"] = self.blame_index
        content["problem_class"] = self.problem_class
        content["app"] = self.app
        content["ts"] = self.timestamp
        return content

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, content):
        return cls.from_frames(
            content["stack"],
            problem_class=content["problem_class"],
            app=content["app"],
            timestamp=content["ts"],
            blame_index=content.get("blame_index"),
        )


@dataclass
class Corpus:
    records: List[CrashRecord] = field(default_factory=list)
    source: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    @property
    def labeled(self):
        return [r for r in self.records if r.blame_index is not None]

    @property
    def apps(self):
        return sorted(set(r.app for r in self.records))

    @property
    def problem_classes(self):
        return sorted(set(r.problem_class for r in self.records))

    def subset(self, records, suffix=""):
        return Corpus(records=list(records), source=self.source + suffix)

    def filter_app(self, app, keep=True):
        """
        Records of one application (keep=True) or of all the others.
        """
        records = [r for r in self.records if (r.app == app) == keep]
        return self.subset(records, ":%s%s" % ("" if keep else "!", app))


def record_hash(record):
    """
    Stable 64-bit digest over (frame texts, blame index, problem class, app).
    The timestamp is deliberately not part of the digest.
    """
    payload = [
        [frame.raw for frame in record.stack],
        record.blame_index,
        record.problem_class,
        record.app,
    ]
    encoded = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    digest = hashlib.blake2b(encoded.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def corpus_digest(corpus):
    """
    Digest of the ordered record hashes of a corpus, as hex.
    """
    hasher = hashlib.blake2b(digest_size=16)
    for record in corpus:
        hasher.update(record_hash(record).to_bytes(8, "big"))
    return hasher.hexdigest()


def dedup(corpus):
    """
    Keep the first occurrence of every record digest, preserving order.
    """
    seen = set()
    keepers = []
    for record in corpus:
        digest = record_hash(record)
        if digest in seen:
            continue
        seen.add(digest)
        keepers.append(record)
    if len(keepers) != len(corpus):
        logger.debug("dedup removed %s records" % (len(corpus) - len(keepers)))
    return Corpus(records=keepers, source=corpus.source)


def temporal_split(corpus, train_fraction=DEFAULT_TRAIN_FRACTION):
    """
    Sort records by time and give the earliest train_fraction to training.
    Equal timestamps are ordered by digest so input order never matters.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1), got %s" % train_fraction)
    if len(corpus) < 2:
        raise ValueError("a temporal split needs at least 2 records")

    ordered = sorted(corpus.records, key=lambda r: (r.timestamp, record_hash(r)))
    n_train = int(round(len(ordered) * train_fraction))
    n_train = min(max(n_train, 1), len(ordered) - 1)
    train = Corpus(records=ordered[:n_train], source=corpus.source + ":train")
    test = Corpus(records=ordered[n_train:], source=corpus.source + ":test")
    return train, test


def parse_record_line(line, lineno=None, path=None):
    try:
        content = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusFormatError("malformed record: %s" % e.msg, path, lineno)
    try:
        jsonschema.validate(instance=content, schema=record_schema)
    except jsonschema.ValidationError as e:
        raise CorpusFormatError(_describe_schema_error(e), path, lineno)
    try:
        return CrashRecord.from_dict(content)
    except (InvalidRecordError, ValueError) as e:
        raise CorpusFormatError(str(e), path, lineno)


def _describe_schema_error(error):
    """
    Name the field a validation error is about.
    """
    if error.validator == "required":
        return "missing required field: %s" % error.message.split("'")[1]
    if error.path:
        return "field %s: %s" % (error.path[0], error.message)
    return error.message


def load_corpus(path):
    """
    Read a record-per-line corpus. Any bad line fails the whole load.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fd:
        for lineno, line in enumerate(fd, start=1):
            if not line.strip():
                continue
            records.append(parse_record_line(line, lineno=lineno, path=path))
    logger.debug("loaded %s records from %s" % (len(records), path))
    return Corpus(records=records, source=str(path))


def corpus_text(corpus):
    return "".join(record.to_json() + "\n" for record in corpus)


def save_corpus(corpus, path):
    utils.write_file(corpus_text(corpus), str(path))
    return path
