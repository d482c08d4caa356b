# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Empirical measurements over a crash corpus: how deep stacks are, how many
# binaries they touch, which problem classes dominate, and where blame lands.

import os
from collections import Counter, namedtuple
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

import crashblame.utils as utils
from crashblame.corpus import catalog
from crashblame.features import app_name_matches
from crashblame.logger import logger

MEMORY_CLASSES = frozenset(
    [
        "INVALID_POINTER_READ",
        "NULL_POINTER_READ",
        "HEAP_CORRUPTION",
        "NULL_CLASS_PTR_READ",
        "INVALID_POINTER_WRITE",
    ]
)

BLAME_BUCKETS = 20


def _binaries(*pools):
    return frozenset(frame.split("!", 1)[0].lower() for pool in pools for frame in pool)


# Software types of the binaries the generator draws from
DRIVER = "driver"
APPLICATION = "application"
SYSTEM = "system"
UNKNOWN_TYPE = "unknown"

DRIVER_BINARIES = _binaries(catalog.DRIVER_FRAMES)
SYSTEM_BINARIES = _binaries(
    catalog.SYSTEM_FRAMES,
    catalog.HEAP_FRAMES,
    catalog.STDLIB_FRAMES,
    catalog.STDLIB_THROWERS,
    catalog.EXCEPTION_HELPERS,
    catalog.THREAD_START_FRAMES,
)
APPLICATION_BINARIES = frozenset(
    binary.lower()
    for app in catalog.DEFAULT_APPS
    for binary in app.binaries + app.wrapper_binaries
)

Distribution = namedtuple("Distribution", ["histogram", "mean", "median"])
BlameRatio = namedtuple("BlameRatio", ["blamed", "appearances", "ratio"])
BlameLocation = namedtuple(
    "BlameLocation", ["histogram", "top_share", "bottom_half_share"]
)


def _require_records(corpus):
    if len(corpus) == 0:
        raise ValueError("statistics need a non-empty corpus")


def _distribution(values):
    histogram = dict(sorted(Counter(values).items()))
    return Distribution(histogram, float(np.mean(values)), float(np.median(values)))


def depth_distribution(corpus):
    _require_records(corpus)
    return _distribution([record.depth for record in corpus])


def distinct_binaries_per_stack(corpus):
    """
    Number of distinct named binaries per stack; frames without one are ignored.
    """
    _require_records(corpus)
    return _distribution(
        [len({f.binary for f in record.stack if f.binary}) for record in corpus]
    )


def normalized_blame_location(record):
    """
    Blame position scaled to [0, 1]: 0 is the top frame, 1 the bottom one.
    """
    if record.blame_index is None:
        raise ValueError("record has no blame_index")
    if record.depth == 1:
        return 0.0
    return record.blame_index / (record.depth - 1)


def blame_location_histogram(corpus, buckets=BLAME_BUCKETS):
    counts = [0] * buckets
    for record in corpus.labeled:
        location = normalized_blame_location(record)
        counts[min(int(location * buckets), buckets - 1)] += 1
    return counts


def blame_location_summary(corpus, buckets=BLAME_BUCKETS):
    """
    The bucketed histogram plus the share of stacks blamed at the very top
    and the share blamed strictly below the middle of the stack.
    """
    labeled = corpus.labeled
    histogram = blame_location_histogram(corpus, buckets)
    if not labeled:
        return BlameLocation(histogram, 0.0, 0.0)
    top = sum(1 for r in labeled if r.blame_index == 0)
    bottom = sum(1 for r in labeled if normalized_blame_location(r) > 0.5)
    return BlameLocation(histogram, top / len(labeled), bottom / len(labeled))


def blame_ratio(corpus):
    """
    Per method key: stacks blaming it over stacks containing it at least once.
    Unlabeled records are skipped.
    """
    appearances = Counter()
    blamed = Counter()
    skipped = 0
    for record in corpus:
        if record.blame_index is None:
            skipped += 1
            continue
        appearances.update({frame.method_key for frame in record.stack})
        blamed[record.blamed_frame.method_key] += 1
    if skipped:
        logger.debug("blame ratio skipped %s unlabeled records" % skipped)
    return {
        key: BlameRatio(blamed[key], count, blamed[key] / count)
        for key, count in sorted(appearances.items())
    }


def problem_class_frequencies(corpus, memory_classes=MEMORY_CLASSES):
    """
    Classes ranked by count (ties by name) and the memory-related share.
    """
    _require_records(corpus)
    counts = Counter(record.problem_class for record in corpus)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    memory = sum(count for name, count in ranked if name in memory_classes)
    return ranked, memory / len(corpus)


def depth_by_app(corpus):
    """
    Mean stack depth per application.
    """
    depths = {}
    for record in corpus:
        depths.setdefault(record.app, []).append(record.depth)
    return {app: float(np.mean(values)) for app, values in sorted(depths.items())}


def software_type(binary, app=None):
    """
    driver, system or application for binaries whose pool is known (kernel
    modules and binaries named after the record's app included), else unknown.
    """
    name = (binary or "").lower()
    if name.endswith(".sys") or name in DRIVER_BINARIES:
        return DRIVER
    if name in SYSTEM_BINARIES:
        return SYSTEM
    if name in APPLICATION_BINARIES or app_name_matches(binary, app):
        return APPLICATION
    return UNKNOWN_TYPE


def depth_by_software_type(corpus):
    """
    Mean stack depth grouped by the software type of the blamed binary.
    """
    depths = {}
    for record in corpus.labeled:
        kind = software_type(record.blamed_frame.binary, record.app)
        depths.setdefault(kind, []).append(record.depth)
    return {kind: float(np.mean(values)) for kind, values in sorted(depths.items())}


def blamed_binary_frequencies(corpus):
    """
    Blamed binaries ranked by how many crashes they account for (ties by
    name), with their share of the labeled records.
    """
    labeled = corpus.labeled
    counts = Counter(record.blamed_frame.binary for record in labeled)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [(binary, count, count / len(labeled)) for binary, count in ranked]


@dataclass
class CorpusStats:
    records: int
    labeled: int
    depth: Distribution
    binaries: Distribution
    problem_classes: List[Tuple[str, int]]
    memory_related_share: float
    blame_location: BlameLocation
    blame_ratio_table: Dict[str, BlameRatio] = field(default_factory=dict)
    depth_by_app: Dict[str, float] = field(default_factory=dict)
    depth_by_software_type: Dict[str, float] = field(default_factory=dict)
    blamed_binaries: List[Tuple[str, int, float]] = field(default_factory=list)

    def summary(self):
        lines = [
            "records: %s (%s labeled)" % (self.records, self.labeled),
            "depth: mean %.2f, median %.1f" % (self.depth.mean, self.depth.median),
            "distinct binaries per stack: mean %.2f" % self.binaries.mean,
            "memory-related share: %.3f" % self.memory_related_share,
            "top-frame blame share: %.3f" % self.blame_location.top_share,
            "bottom-half blame share: %.3f" % self.blame_location.bottom_half_share,
        ]
        ratios = [r.ratio for r in self.blame_ratio_table.values()]
        if ratios:
            below = sum(1 for r in ratios if r < 1)
            lines.append("methods with blame ratio below 1: %s of %s" % (below, len(ratios)))
        return "\n".join(lines) + "\n"


def analyze_corpus(corpus, memory_classes=MEMORY_CLASSES):
    ranked, share = problem_class_frequencies(corpus, memory_classes)
    return CorpusStats(
        records=len(corpus),
        labeled=len(corpus.labeled),
        depth=depth_distribution(corpus),
        binaries=distinct_binaries_per_stack(corpus),
        problem_classes=ranked,
        memory_related_share=share,
        blame_location=blame_location_summary(corpus),
        blame_ratio_table=blame_ratio(corpus),
        depth_by_app=depth_by_app(corpus),
        depth_by_software_type=depth_by_software_type(corpus),
        blamed_binaries=blamed_binary_frequencies(corpus),
    )


def write_stats(stats, outdir):
    """
    One CSV per statistic plus a text summary. Returns the written paths.
    """
    utils.mkdir_p(outdir)
    buckets = len(stats.blame_location.histogram)
    tables = {
        "depth.csv": (["depth", "count"], stats.depth.histogram.items()),
        "binaries.csv": (["distinct_binaries", "count"], stats.binaries.histogram.items()),
        "problem_classes.csv": (
            ["problem_class", "count", "share"],
            [(n, c, "%.6f" % (c / stats.records)) for n, c in stats.problem_classes],
        ),
        "blame_location.csv": (
            ["bucket_start", "bucket_end", "count"],
            [
                ("%.2f" % (i / buckets), "%.2f" % ((i + 1) / buckets), count)
                for i, count in enumerate(stats.blame_location.histogram)
            ],
        ),
        "blame_ratio.csv": (
            ["method", "blamed", "appearances", "ratio"],
            [
                (key, r.blamed, r.appearances, "%.6f" % r.ratio)
                for key, r in stats.blame_ratio_table.items()
            ],
        ),
        "depth_by_app.csv": (
            ["app", "mean_depth"],
            [(app, "%.4f" % depth) for app, depth in stats.depth_by_app.items()],
        ),
        "depth_by_software_type.csv": (
            ["software_type", "mean_depth"],
            [(kind, "%.4f" % depth) for kind, depth in stats.depth_by_software_type.items()],
        ),
        "blamed_binaries.csv": (
            ["binary", "count", "share"],
            [(b, c, "%.6f" % share) for b, c, share in stats.blamed_binaries],
        ),
    }
    contents = {
        os.path.join(outdir, filename): utils.csv_text(header, rows)
        for filename, (header, rows) in tables.items()
    }
    contents[os.path.join(outdir, "summary.txt")] = stats.summary()
    return utils.write_files(contents)
