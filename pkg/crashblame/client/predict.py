# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import json

import crashblame.utils as utils
from crashblame.client import require_files
from crashblame.corpus import CrashRecord
from crashblame.errors import UsageError
from crashblame.models import get_localizer, load_model, predict_problem_class

UNKNOWN_CLASS = "unknown"


def read_frames(args):
    if args.stack_file:
        require_files(args.stack_file)
        lines = utils.read_file(args.stack_file).splitlines()
    else:
        lines = args.stack.split(";")
    frames = [line.strip() for line in lines if line.strip()]
    if not frames:
        raise UsageError("the stack has no frames")
    return frames


def main(args, parser, extra, subparser):
    """
    Print the blamed frame of one stack, with the attention weight of every
    frame for sequence models.
    """
    require_files(args.model)
    bundle = load_model(args.model)
    record = CrashRecord.from_frames(read_frames(args), UNKNOWN_CLASS, args.app)
    constrained = False if args.unconstrained else None
    prediction = get_localizer(bundle, constrained=constrained).predict(record)

    result = {
        "index": prediction.index,
        "frame": record.stack[prediction.index].raw,
        "alpha": None if prediction.alpha is None else [float(a) for a in prediction.alpha],
    }
    if bundle.kind == "multitask":
        name, probs = predict_problem_class(bundle, record)
        result["problem_class"] = name
        result["class_probabilities"] = probs

    if args.json:
        print(json.dumps(result, indent=4))
        return

    print("blamed frame %s: %s" % (result["index"], result["frame"]))
    if "problem_class" in result:
        print(
            "problem class: %s (%.3f)"
            % (result["problem_class"], result["class_probabilities"][result["problem_class"]])
        )
    if result["alpha"] is not None:
        for i, (frame, weight) in enumerate(zip(record.stack, result["alpha"])):
            marker = "*" if i == result["index"] else " "
            print("%s %3d  %.4f  %s" % (marker, i, weight, frame.raw))
