# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Adapting a global model to one application with a few labeled crashes.

from dataclasses import replace

from crashblame.errors import ModelFormatError
from crashblame.logger import logger

from .sequence import train_sequence_model


def fine_tune(global_bundle, target_train, target_valid=None, config=None, featurizer=None):
    """
    Continue training every layer of global_bundle on the target records at
    a reduced learning rate. The vocabulary and class list stay those of the
    global model. With no target records the global bundle is returned as is,
    under config when one is given.
    """
    if not global_bundle.is_sequence:
        raise ModelFormatError(
            "fine-tuning needs a sequence model, got %s" % global_bundle.kind
        )
    if featurizer is not None and not featurizer.same_vocabulary(global_bundle.featurizer):
        raise ModelFormatError("the vocabulary differs from the global model's")
    if len(target_train.labeled) == 0:
        logger.info("no target records: using the global model as is")
        if config is None or config == global_bundle.config:
            return global_bundle
        return replace(global_bundle, config=config)

    config = config or global_bundle.config
    learning_rate = config.learning_rate * config.finetune_lr_scale
    logger.info(
        "fine-tuning %s on %s target records at learning rate %g"
        % (global_bundle.kind, len(target_train.labeled), learning_rate)
    )
    return train_sequence_model(
        global_bundle.kind,
        target_train,
        valid=target_valid,
        config=config,
        featurizer=global_bundle.featurizer,
        initial=global_bundle.params,
        classes=global_bundle.classes,
        learning_rate=learning_rate,
    )
