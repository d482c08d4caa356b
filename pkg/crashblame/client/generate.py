# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from dataclasses import replace

from crashblame.client import require_files
from crashblame.corpus import GeneratorConfig, generate_synthetic, save_corpus
from crashblame.logger import logger


def main(args, parser, extra, subparser):
    """
    Write a synthetic corpus, one record per line.
    """
    if args.config_yaml:
        require_files(args.config_yaml)
        config = GeneratorConfig.load(args.config_yaml)
    else:
        config = GeneratorConfig()
    overrides = {"records": args.records, "seed": args.seed}
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})

    logger.info("generating %s records with seed %s" % (config.records, config.seed))
    corpus = generate_synthetic(config)
    save_corpus(corpus, args.out)
    logger.info("wrote %s" % args.out)
