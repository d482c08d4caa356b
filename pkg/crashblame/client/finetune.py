# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from crashblame.client import require_files, train_config
from crashblame.corpus import load_corpus
from crashblame.errors import UsageError
from crashblame.experiment.curve import nested_subsets
from crashblame.logger import logger
from crashblame.models import fine_tune, load_model, save_model


def main(args, parser, extra, subparser):
    require_files(args.model, args.train)
    bundle = load_model(args.model)
    config = train_config(args, base=bundle.config)
    target = load_corpus(args.train)
    if args.k is not None:
        records = target.labeled
        if not 0 <= args.k <= len(records):
            raise UsageError(
                "--k must be in [0, %s] for this corpus, got %s" % (len(records), args.k)
            )
        target = target.subset(nested_subsets(records, [args.k], config.seed)[args.k])

    tuned = fine_tune(bundle, target, config=config)
    save_model(tuned, args.out)
    logger.info("saved fine-tuned model to %s" % args.out)
