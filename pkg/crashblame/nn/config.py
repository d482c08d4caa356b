# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from dataclasses import asdict, dataclass, fields

import jsonschema

import crashblame.utils as utils
from crashblame.errors import InvalidConfigError
from crashblame.schemas import train_config_schema


@dataclass
class TrainConfig:
    """
    Training hyperparameters shared by every trainable model kind.
    class_weight is the multi-task lambda; tfidf_dim is n per field.
    """

    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 50
    patience: int = 3
    dropout: float = 0.25
    hidden_size: int = 200
    seed: int = 0
    validation_fraction: float = 0.1
    class_weight: float = 0.5
    tfidf_dim: int = 64
    finetune_lr_scale: float = 0.3
    constrained_decoding: bool = True
    logreg_c: float = 1.0
    logreg_max_iter: int = 1000
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0 <= self.dropout < 1:
            raise InvalidConfigError("dropout must be in [0, 1), got %s" % self.dropout)
        if self.class_weight < 0:
            raise InvalidConfigError("class_weight must be non-negative")

    @classmethod
    def from_dict(cls, content):
        content = content or {}
        try:
            jsonschema.validate(instance=content, schema=train_config_schema)
        except jsonschema.ValidationError as e:
            raise InvalidConfigError("train config: %s" % e.message)
        return cls(**content)

    @classmethod
    def load(cls, path):
        return cls.from_dict(utils.read_yaml(path))

    def to_dict(self):
        return asdict(self)

    def update(self, **overrides):
        """
        A copy with the non-None overrides applied.
        """
        known = {f.name for f in fields(self)}
        values = self.to_dict()
        for key, value in overrides.items():
            if key not in known:
                raise InvalidConfigError("unknown train config field %s" % key)
            if value is not None:
                values[key] = value
        return TrainConfig.from_dict(values)
