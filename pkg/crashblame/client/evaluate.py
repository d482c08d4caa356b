# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from crashblame.client import output_dir, require_files
from crashblame.corpus import load_corpus
from crashblame.experiment import evaluate, feature_importance, write_report
from crashblame.models import load_model


def main(args, parser, extra, subparser):
    require_files(args.model, args.test)
    outdir = output_dir(args)
    bundle = load_model(args.model)
    constrained = False if args.unconstrained else None
    report, log = evaluate(bundle, load_corpus(args.test), constrained=constrained)
    if args.all_gates and bundle.is_sequence:
        report.importance = feature_importance(bundle, all_gates=True)
    write_report(report, log, outdir)
    print(report.summary(), end="")
