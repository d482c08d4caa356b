# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import crashblame.utils as utils
from crashblame.client import require_files
from crashblame.corpus import GeneratorConfig, load_corpus
from crashblame.experiment import load_prediction_log
from crashblame.logger import logger
from crashblame.nn.config import TrainConfig


def main(args, parser, extra, subparser):
    """
    Validate a corpus, a config file or a prediction log. The first problem
    found is raised with its line number where there is one.
    """
    require_files(args.filename)
    if args.format == "corpus":
        corpus = load_corpus(args.filename)
        logger.info("%s is valid: %s records" % (args.filename, len(corpus)))
        return
    if args.format == "predictions":
        log = load_prediction_log(args.filename)
        logger.info("%s is valid: %s predictions" % (args.filename, len(log)))
        return

    content = utils.read_yaml(args.filename)
    if args.format == "generator":
        GeneratorConfig.from_dict(content)
    else:
        TrainConfig.from_dict(content)
    logger.info("%s is valid" % args.filename)
