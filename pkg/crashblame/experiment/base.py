# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# An evaluation runs one bundle over a test corpus, keeps a per-record
# prediction log, and reports accuracy in several cuts.

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import jsonschema

import crashblame.utils as utils
from crashblame.corpus import corpus_digest, record_hash
from crashblame.errors import CorpusFormatError, ModelFormatError, TrainingError
from crashblame.logger import logger
from crashblame.models import get_localizer
from crashblame.schemas import prediction_schema

from .metrics import (
    ClassAccuracy,
    accuracy,
    feature_importance,
    offset_histogram,
    per_class_accuracy,
)

NORMALIZATION_NOTE = "importances are scaled by their maximum absolute value"


@dataclass
class EvalReport:
    """
    Accuracy of one model on one test corpus, with everything needed to
    trace the number back to its inputs.
    """

    kind: str
    accuracy: float
    records: int
    per_class: Dict[str, ClassAccuracy] = field(default_factory=dict)
    offsets: Dict[int, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    train_digest: str = ""
    test_digest: str = ""
    log_digest: str = ""
    importance: List[Tuple[str, float]] = field(default_factory=list)
    fallback_rate: Optional[float] = None
    history: List[dict] = field(default_factory=list)

    def to_dict(self):
        """
        Return the report as a dictionary
        """
        return {
            "kind": self.kind,
            "accuracy": self.accuracy,
            "records": self.records,
            "per_class": {
                name: {"accuracy": row.accuracy, "records": row.records}
                for name, row in self.per_class.items()
            },
            "offsets": {str(k): v for k, v in self.offsets.items()},
            "config": self.config,
            "train_digest": self.train_digest,
            "test_digest": self.test_digest,
            "log_digest": self.log_digest,
            "importance": [[name, value] for name, value in self.importance],
            "fallback_rate": self.fallback_rate,
            "history": self.history,
        }

    def to_json(self):
        """
        Return the report as json
        """
        return json.dumps(self.to_dict(), sort_keys=True)

    def summary(self):
        lines = [
            "model: %s" % self.kind,
            "test records: %s" % self.records,
            "accuracy: %.4f" % self.accuracy,
            "train corpus digest: %s" % self.train_digest,
            "test corpus digest: %s" % self.test_digest,
            "prediction log digest: %s" % self.log_digest,
        ]
        if self.fallback_rate is not None:
            lines.append("marginal fallback rate: %.4f" % self.fallback_rate)
        lines.append("")
        lines.append("per problem class:")
        for name, row in self.per_class.items():
            lines.append("  %-24s %.4f (%s records)" % (name, row.accuracy, row.records))
        if self.importance:
            lines.append("")
            lines.append("feature importance (%s):" % NORMALIZATION_NOTE)
            for name, value in self.importance[:10]:
                lines.append("  %-40s %+.4f" % (name, value))
        lines.append("")
        lines.append("config:")
        for key, value in sorted(self.config.items()):
            lines.append("  %s: %s" % (key, value))
        return "\n".join(lines) + "\n"


def prediction_log_text(log):
    return "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in log)


def log_digest(log):
    text = prediction_log_text(log)
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()


def log_accuracy(log):
    """
    Accuracy recomputed from a prediction log alone.
    """
    scored = [e for e in log if e["true_index"] is not None]
    return accuracy(
        [e["predicted_index"] for e in scored], [e["true_index"] for e in scored]
    )


def evaluate(bundle, corpus, constrained=None, importance=True):
    """
    Predict every labeled record of corpus. Returns (EvalReport, log), where
    log holds one entry per labeled record in corpus order.
    """
    records = corpus.labeled
    if not records:
        raise TrainingError("evaluation needs labeled records")
    if len(records) != len(corpus):
        logger.warning("skipping %s unlabeled records" % (len(corpus) - len(records)))

    localizer = get_localizer(bundle, constrained=constrained)
    logger.info("evaluating %s on %s records" % (localizer, len(records)))
    log = []
    fallbacks = 0
    for i, record in enumerate(records):
        prediction = localizer.predict(record)
        fallbacks += bool(prediction.fallback)
        alpha = None if prediction.alpha is None else [float(a) for a in prediction.alpha]
        log.append(
            {
                "hash": "%016x" % record_hash(record),
                "true_index": record.blame_index,
                "predicted_index": int(prediction.index),
                "alpha": alpha,
            }
        )
        if (i + 1) % 1000 == 0:
            logger.progress(i + 1, len(records), "records")

    predicted = [entry["predicted_index"] for entry in log]
    truths = [record.blame_index for record in records]
    fallback_rate = None
    if bundle.is_sequence:
        fallback_rate = fallbacks / len(records)
        if fallbacks:
            logger.warning(
                "%s of %s predictions (%.2f%%) fell back to the highest BF marginal"
                % (fallbacks, len(records), 100 * fallback_rate)
            )

    ranked = []
    if importance and (bundle.is_sequence or bundle.kind == "logreg"):
        ranked = feature_importance(bundle)

    report = EvalReport(
        kind=bundle.kind,
        accuracy=accuracy(predicted, truths),
        records=len(records),
        per_class=per_class_accuracy(
            predicted, truths, [record.problem_class for record in records]
        ),
        offsets=offset_histogram(predicted, truths),
        config=bundle.config.to_dict(),
        train_digest=bundle.corpus_digest,
        test_digest=corpus_digest(corpus),
        log_digest=log_digest(log),
        importance=ranked,
        fallback_rate=fallback_rate,
        history=list(bundle.history),
    )
    logger.info("%s accuracy: %.4f" % (bundle.kind, report.accuracy))
    return report, log


def write_report(report, log, outdir):
    """
    Write the report tables, a text summary and the prediction log to outdir.
    Returns the written paths.
    """
    if log_digest(log) != report.log_digest:
        raise ModelFormatError("the prediction log does not match the report")
    tables = {
        "report.csv": (
            ["kind", "accuracy", "records", "train_digest", "test_digest", "log_digest"],
            [
                (
                    report.kind,
                    "%.6f" % report.accuracy,
                    report.records,
                    report.train_digest,
                    report.test_digest,
                    report.log_digest,
                )
            ],
        ),
        "per_class.csv": (
            ["problem_class", "accuracy", "records"],
            [
                (name, "%.6f" % row.accuracy, row.records)
                for name, row in report.per_class.items()
            ],
        ),
        "offsets.csv": (["offset", "count"], report.offsets.items()),
        "importance.csv": (
            ["feature", "importance"],
            [(name, "%.6f" % value) for name, value in report.importance],
        ),
    }
    contents = {
        os.path.join(outdir, filename): utils.csv_text(header, rows)
        for filename, (header, rows) in tables.items()
    }
    contents[os.path.join(outdir, "summary.txt")] = report.summary()
    contents[os.path.join(outdir, "predictions.jsonl")] = prediction_log_text(log)
    written = utils.write_files(contents)
    logger.info("wrote evaluation report to %s" % outdir)
    return written


def load_prediction_log(path):
    """
    Read a prediction log, checking every line against the log schema.
    """
    log = []
    with open(path, "r", encoding="utf-8") as fd:
        for lineno, line in enumerate(fd, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                jsonschema.validate(instance=entry, schema=prediction_schema)
            except json.JSONDecodeError as e:
                raise CorpusFormatError("malformed prediction: %s" % e.msg, path, lineno)
            except jsonschema.ValidationError as e:
                raise CorpusFormatError(e.message, path, lineno)
            log.append(entry)
    return log
