# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import os

from crashblame.client import output_dir, require_files, train_config
from crashblame.corpus import load_corpus
from crashblame.experiment import learning_curve, parse_k_list, write_curve
from crashblame.models import load_model


def main(args, parser, extra, subparser):
    require_files(args.model, args.target)
    ks = parse_k_list(args.ks)
    outdir = output_dir(args)
    bundle = load_model(args.model)
    config = train_config(args, base=bundle.config)
    if args.unconstrained:
        config = config.update(constrained_decoding=False)

    points = learning_curve(bundle, load_corpus(args.target), ks, config)
    path = write_curve(points, os.path.join(outdir, "curve.csv"))
    print("K,finetune_acc,scratch_acc")
    for point in points:
        print("%s,%.4f,%.4f" % point)
    return path
