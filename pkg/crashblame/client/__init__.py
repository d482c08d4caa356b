#!/usr/bin/env python

# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import argparse
import os
import sys

import crashblame
from crashblame.errors import CrashBlameError, UsageError
from crashblame.logger import logger, setup_logger
from crashblame.models.bundle import KIND_CHOICES
from crashblame.nn.config import TrainConfig


class ArgumentParser(argparse.ArgumentParser):
    """
    Usage errors exit with 1 instead of argparse's 2, which is kept for data errors.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def add_seed(subparser):
    subparser.add_argument(
        "--seed",
        dest="seed",
        help="seed for every random choice (overrides seeds in config files)",
        type=int,
    )


def add_train_options(subparser):
    subparser.add_argument(
        "-c",
        "--config",
        dest="config_yaml",
        help="read training options from yaml (command line flags win)",
    )
    subparser.add_argument("--epochs", dest="max_epochs", type=int, help="maximum epochs")
    subparser.add_argument("--hidden", dest="hidden_size", type=int, help="hidden units")
    subparser.add_argument(
        "--lambda",
        dest="class_weight",
        type=float,
        help="weight of the problem-class loss (multitask only)",
    )
    subparser.add_argument("--lr", dest="learning_rate", type=float, help="learning rate")
    add_seed(subparser)


def add_outdir(subparser):
    subparser.add_argument(
        "-o",
        "--out",
        dest="out",
        help="output directory (defaults to $CRASHBLAME_OUTDIR)",
    )


def get_parser():
    parser = ArgumentParser(
        prog="crashblame",
        description="Crashblame: localize the blamed frame in crash stacks",
        formatter_class=argparse.RawTextHelpFormatter,
    )

    # Global Variables
    parser.add_argument(
        "--debug",
        dest="debug",
        help="use verbose logging to debug.",
        default=False,
        action="store_true",
    )

    parser.add_argument(
        "--quiet",
        dest="quiet",
        help="suppress additional output.",
        default=False,
        action="store_true",
    )

    parser.add_argument(
        "--nocolor",
        dest="nocolor",
        help="do not color log output.",
        default=False,
        action="store_true",
    )

    parser.add_argument(
        "--version",
        dest="version",
        help="show software version.",
        default=False,
        action="store_true",
    )

    description = "actions for crashblame"
    subparsers = parser.add_subparsers(
        help="crashblame actions",
        title="actions",
        description=description,
        dest="command",
        parser_class=ArgumentParser,
    )

    # print version and exit
    subparsers.add_parser("version", description="show software version")

    generate = subparsers.add_parser(
        "generate",
        description="generate a synthetic crash corpus.",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    generate.add_argument(
        "-c", "--config", dest="config_yaml", help="generator config yaml"
    )
    generate.add_argument("--records", type=int, help="number of records")
    generate.add_argument("-o", "--out", dest="out", required=True, help="corpus file")
    add_seed(generate)

    split = subparsers.add_parser(
        "split",
        description="deduplicate a corpus and split it in time into train and test.",
    )
    split.add_argument("--corpus", required=True, help="corpus file")
    split.add_argument("--train-out", dest="train_out", required=True)
    split.add_argument("--test-out", dest="test_out", required=True)
    split.add_argument(
        "--fraction",
        type=float,
        default=None,
        help="share of the earliest records used for training (default 11/14)",
    )
    split.add_argument("--app", help="keep only the records of this application")
    split.add_argument(
        "--exclude-app", dest="exclude_app", help="drop the records of this application"
    )

    analyze = subparsers.add_parser(
        "analyze", description="write corpus statistics as csv."
    )
    analyze.add_argument("--corpus", required=True, help="corpus file")
    add_outdir(analyze)

    train = subparsers.add_parser("train", description="train a localization model.")
    train.add_argument(
        "--kind",
        required=True,
        choices=KIND_CHOICES,
        help="model kind (deepanalyze is an alias of multitask)",
    )
    train.add_argument("--train", dest="train", required=True, help="training corpus")
    train.add_argument("--valid", dest="valid", help="validation corpus (default: hold out)")
    train.add_argument("-o", "--out", dest="out", required=True, help="model file")
    add_train_options(train)

    evaluate = subparsers.add_parser(
        "eval", description="evaluate a model on a test corpus."
    )
    evaluate.add_argument("--model", required=True, help="model file")
    evaluate.add_argument("--test", required=True, help="test corpus")
    evaluate.add_argument(
        "--all-gates",
        dest="all_gates",
        default=False,
        action="store_true",
        help="sum all four gate input weights for feature importance",
    )
    add_outdir(evaluate)

    predict = subparsers.add_parser(
        "predict", description="print the blamed frame of one stack."
    )
    predict.add_argument("--model", required=True, help="model file")
    frames = predict.add_mutually_exclusive_group(required=True)
    frames.add_argument("--stack", help='frames separated by ";", top first')
    frames.add_argument("--stack-file", dest="stack_file", help="one frame per line")
    predict.add_argument("--app", default="", help="application name of the crash")
    predict.add_argument("--json", default=False, action="store_true", help="print json")

    finetune = subparsers.add_parser(
        "finetune", description="adapt a global model to one application."
    )
    finetune.add_argument("--model", required=True, help="global model file")
    finetune.add_argument("--train", required=True, help="target training corpus")
    finetune.add_argument("--k", type=int, help="use the first K records (after shuffling)")
    finetune.add_argument("-o", "--out", dest="out", required=True, help="model file")
    add_train_options(finetune)

    curve = subparsers.add_parser(
        "curve", description="fine-tuning against training from scratch, per K."
    )
    curve.add_argument("--model", required=True, help="global model file")
    curve.add_argument("--target", required=True, help="target application corpus")
    curve.add_argument("--ks", default="0,100,500,1000,2000,5000", help="comma list of K")
    add_outdir(curve)
    add_train_options(curve)

    for subparser in [predict, evaluate, curve]:
        subparser.add_argument(
            "--unconstrained",
            dest="unconstrained",
            default=False,
            action="store_true",
            help="plain Viterbi decoding instead of exactly one blamed frame",
        )

    validate = subparsers.add_parser(
        "validate",
        description="validate a corpus, config or prediction log",
    )
    validate.add_argument("filename", help="file to validate")
    validate.add_argument(
        "--format",
        dest="format",
        choices=["corpus", "generator", "train", "predictions"],
        default="corpus",
    )
    return parser


def get_subparser(parser, command):
    """
    retrieve subparser (with help) from parser
    """
    subparsers_actions = [
        action
        for action in parser._actions
        if isinstance(action, argparse._SubParsersAction)
    ]
    for subparsers_action in subparsers_actions:
        for choice, subparser in subparsers_action.choices.items():
            if choice == command:
                return subparser


def run(argv=None):
    """
    Run one subcommand and return its exit code.
    """
    parser = get_parser()
    argv = sys.argv[1:] if argv is None else list(argv)

    # If the user didn't provide any arguments, show the full help
    if not argv:
        print("\nCrashblame Client v%s" % crashblame.__version__)
        parser.print_help()
        return 0

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    # Show the version and exit
    if args.command == "version" or args.version:
        print(crashblame.__version__)
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    setup_logger(quiet=args.quiet, nocolor=args.nocolor, debug=args.debug)

    if args.command == "generate":
        from .generate import main
    if args.command == "split":
        from .split import main
    if args.command == "analyze":
        from .analyze import main
    if args.command == "train":
        from .train import main
    if args.command == "eval":
        from .evaluate import main
    if args.command == "predict":
        from .predict import main
    if args.command == "finetune":
        from .finetune import main
    if args.command == "curve":
        from .curve import main
    if args.command == "validate":
        from .validate import main

    try:
        main(args=args, parser=parser, extra=[], subparser=get_subparser(parser, args.command))
    except CrashBlameError as e:
        logger.error(str(e))
        return e.exit_code
    except ValueError as e:
        logger.error(str(e))
        return CrashBlameError.exit_code
    return 0


def run_crashblame():
    """run_crashblame to localize crashes!"""
    sys.exit(run())


def output_dir(args):
    """
    The --out directory, or $CRASHBLAME_OUTDIR when it is not given.
    """
    outdir = args.out or os.environ.get("CRASHBLAME_OUTDIR")
    if not outdir:
        raise UsageError("give --out or set CRASHBLAME_OUTDIR")
    return outdir


def require_files(*paths):
    for path in paths:
        if path and not os.path.exists(path):
            raise UsageError("%s does not exist." % path)


def train_config(args, base=None):
    """
    TrainConfig from --config (or base), with command line flags on top.
    """
    if getattr(args, "config_yaml", None):
        require_files(args.config_yaml)
        config = TrainConfig.load(args.config_yaml)
    else:
        config = base or TrainConfig()
    return config.update(
        max_epochs=args.max_epochs,
        hidden_size=args.hidden_size,
        class_weight=args.class_weight,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )


if __name__ == "__main__":
    run_crashblame()
