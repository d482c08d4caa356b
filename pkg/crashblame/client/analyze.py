# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from crashblame.client import output_dir, require_files
from crashblame.corpus import load_corpus
from crashblame.logger import logger
from crashblame.stats import analyze_corpus, write_stats


def main(args, parser, extra, subparser):
    require_files(args.corpus)
    outdir = output_dir(args)
    stats = analyze_corpus(load_corpus(args.corpus))
    for path in write_stats(stats, outdir):
        logger.debug("wrote %s" % path)
    print(stats.summary(), end="")
