# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# A trained model and its file container.
#
# Layout (big-endian lengths):
#   magic (8 bytes) | version u16 | header length u32 | header JSON
#   | vocab length u32 | vocab JSON | tensors as little-endian float64,
#   in header order | SHA-256 of everything before it (32 bytes)

import copy
import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

import crashblame.utils as utils
from crashblame.errors import ModelFormatError
from crashblame.features import StackFeaturizer
from crashblame.logger import logger
from crashblame.nn.config import TrainConfig

MAGIC = b"CRSHBLM\x00"
FORMAT_VERSION = 1
CHECKSUM_SIZE = 32

HEURISTIC_KINDS = ("top", "second", "most_freq")
SEQUENCE_KINDS = ("bilstm_crf_attn", "multitask")
KINDS = HEURISTIC_KINDS + ("logreg",) + SEQUENCE_KINDS

# Other names a kind is known by; bundles always carry the canonical one
KIND_ALIASES = {"deepanalyze": "multitask"}
KIND_CHOICES = KINDS + tuple(KIND_ALIASES)


def canonical_kind(kind):
    return KIND_ALIASES.get(kind, kind)


@dataclass
class ModelBundle:
    kind: str
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    featurizer: Optional[StackFeaturizer] = None
    config: TrainConfig = field(default_factory=TrainConfig)
    classes: List[str] = field(default_factory=list)
    blame_table: Dict[str, int] = field(default_factory=dict)
    corpus_digest: str = ""
    history: List[dict] = field(default_factory=list)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        self.kind = canonical_kind(self.kind)
        if self.kind not in KINDS:
            raise ModelFormatError(
                "unknown model kind %s, choose from %s" % (self.kind, ", ".join(KINDS))
            )

    @property
    def is_sequence(self):
        return self.kind in SEQUENCE_KINDS

    def copy(self):
        return copy.deepcopy(self)

    def header(self):
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "config": self.config.to_dict(),
            "blame_table": dict(sorted(self.blame_table.items())),
            "corpus_digest": self.corpus_digest,
            "history": self.history,
            "tensors": [[name, list(self.params[name].shape)] for name in sorted(self.params)],
        }


def _dumps(content):
    return json.dumps(content, sort_keys=True, separators=(",", ":")).encode("utf-8")


def to_bytes(bundle):
    header = _dumps(bundle.header())
    vocab = _dumps(bundle.featurizer.to_dict() if bundle.featurizer else None)
    parts = [
        MAGIC,
        struct.pack(">H", bundle.version),
        struct.pack(">I", len(header)),
        header,
        struct.pack(">I", len(vocab)),
        vocab,
    ]
    for name in sorted(bundle.params):
        parts.append(np.ascontiguousarray(bundle.params[name], dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def from_bytes(content, where="model"):
    minimum = len(MAGIC) + 2 + 4 + CHECKSUM_SIZE
    if len(content) < minimum or not content.startswith(MAGIC):
        raise ModelFormatError("%s is not a crashblame model file" % where)
    body, checksum = content[:-CHECKSUM_SIZE], content[-CHECKSUM_SIZE:]
    if hashlib.sha256(body).digest() != checksum:
        raise ModelFormatError("%s failed its checksum; the file is corrupt" % where)

    offset = len(MAGIC)
    (version,) = struct.unpack_from(">H", body, offset)
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            "%s has format version %s, this release reads version %s"
            % (where, version, FORMAT_VERSION)
        )
    offset += 2

    def section():
        nonlocal offset
        (length,) = struct.unpack_from(">I", body, offset)
        offset += 4
        raw = body[offset : offset + length]
        offset += length
        return json.loads(raw.decode("utf-8"))

    try:
        header = section()
        vocab = section()
        params = {}
        for name, shape in header["tensors"]:
            count = int(np.prod(shape)) if shape else 1
            values = np.frombuffer(body, dtype="<f8", count=count, offset=offset)
            params[name] = values.astype(np.float64).reshape(shape)
            offset += 8 * count
    except (struct.error, ValueError, KeyError) as e:
        raise ModelFormatError("%s has a malformed layout: %s" % (where, e))
    if offset != len(body):
        raise ModelFormatError("%s has %s trailing bytes" % (where, len(body) - offset))

    return ModelBundle(
        kind=header["kind"],
        params=params,
        featurizer=StackFeaturizer.from_dict(vocab) if vocab else None,
        config=TrainConfig.from_dict(header["config"]),
        classes=header["classes"],
        blame_table=header["blame_table"],
        corpus_digest=header["corpus_digest"],
        history=header["history"],
        version=version,
    )


def save_model(bundle, path):
    utils.write_bytes(to_bytes(bundle), str(path))
    logger.debug("saved %s model to %s" % (bundle.kind, path))
    return path


def load_model(path):
    try:
        content = utils.read_file(str(path), mode="rb")
    except FileNotFoundError:
        raise ModelFormatError("model file %s does not exist" % path)
    return from_bytes(content, where=str(path))
