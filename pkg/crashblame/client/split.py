# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import os

import crashblame.utils as utils
from crashblame.client import require_files
from crashblame.corpus import (
    DEFAULT_TRAIN_FRACTION,
    corpus_text,
    dedup,
    load_corpus,
    temporal_split,
)
from crashblame.errors import UsageError
from crashblame.logger import logger


def main(args, parser, extra, subparser):
    require_files(args.corpus)
    if args.app and args.exclude_app:
        raise UsageError("choose one of --app and --exclude-app")
    if os.path.abspath(args.train_out) == os.path.abspath(args.test_out):
        raise UsageError("--train-out and --test-out must be different files")
    corpus = dedup(load_corpus(args.corpus))
    if args.app:
        corpus = corpus.filter_app(args.app)
    elif args.exclude_app:
        corpus = corpus.filter_app(args.exclude_app, keep=False)
    if not len(corpus):
        raise UsageError("no records left to split")

    fraction = DEFAULT_TRAIN_FRACTION if args.fraction is None else args.fraction
    train, test = temporal_split(corpus, fraction)
    utils.write_files(
        {args.train_out: corpus_text(train), args.test_out: corpus_text(test)}
    )
    logger.info(
        "%s training records in %s, %s test records in %s"
        % (len(train), args.train_out, len(test), args.test_out)
    )
