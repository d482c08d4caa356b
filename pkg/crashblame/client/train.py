# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from crashblame.client import require_files, train_config
from crashblame.corpus import load_corpus
from crashblame.logger import logger
from crashblame.models import save_model, train_model


def main(args, parser, extra, subparser):
    require_files(args.train, args.valid)
    config = train_config(args)
    train = load_corpus(args.train)
    valid = load_corpus(args.valid) if args.valid else None
    bundle = train_model(args.kind, train, config=config, valid=valid)
    save_model(bundle, args.out)
    logger.info("saved %s model to %s" % (args.kind, args.out))
