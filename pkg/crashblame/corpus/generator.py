# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Seeded synthetic crash corpora with a planted, context-dependent blame rule.
#
# The rule scans a stack from the top, walks past logging/reporting wrappers,
# system and standard library frames, and blames the first driver or
# application frame. Problem classes bend it: heap corruption puts allocator
# frames on top, C++ exceptions put throw helpers on top (and may blame a
# standard library thrower), and stack overflows blame the top of the
# repeated cycle. Prefixes stay in the top half of the stack; only the deep
# blame pattern puts blame in the bottom half.
#
# Each record gets a budget of distinct binaries. Budgets are steered by the
# running error against binaries_target, so the corpus mean tracks it.

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List

import jsonschema
import numpy as np

import crashblame.utils as utils
from crashblame.errors import InvalidConfigError
from crashblame.logger import logger
from crashblame.schemas import generator_config_schema

from . import catalog
from .catalog import AppProfile
from .record import MAX_DEPTH, Corpus, CrashRecord, record_hash

INVALID_POINTER_READ = "INVALID_POINTER_READ"
NULL_POINTER_READ = "NULL_POINTER_READ"
HEAP_CORRUPTION = "HEAP_CORRUPTION"
APPLICATION_FAULT = "APPLICATION_FAULT"
CPP_EXCEPTION = "CPP_EXCEPTION"
STACK_OVERFLOW = "STACK_OVERFLOW"

PROBLEM_CLASSES = (
    INVALID_POINTER_READ,
    NULL_POINTER_READ,
    HEAP_CORRUPTION,
    APPLICATION_FAULT,
    CPP_EXCEPTION,
    STACK_OVERFLOW,
)

# Classes that follow the plain scan-from-the-top rule
GENERIC_CLASSES = (INVALID_POINTER_READ, NULL_POINTER_READ, APPLICATION_FAULT)

# Memory-related classes make up 61% of the mixture
DEFAULT_CLASS_WEIGHTS = {
    INVALID_POINTER_READ: 0.30,
    NULL_POINTER_READ: 0.23,
    HEAP_CORRUPTION: 0.08,
    APPLICATION_FAULT: 0.25,
    CPP_EXCEPTION: 0.09,
    STACK_OVERFLOW: 0.05,
}

DEFAULT_POOL_WEIGHTS = {
    catalog.APP: 0.40,
    catalog.DRIVER: 0.10,
    catalog.SYSTEM: 0.25,
    catalog.STDLIB: 0.15,
    catalog.WRAPPER: 0.10,
}

# 2022-01-01T00:00:00Z
DEFAULT_START_TS = 1640995200
SECONDS_PER_DAY = 86400

# Background rate of crash-prone methods in frames that are not blamed
BACKGROUND_CRASH_PRONE_RATE = 0.05

# Redraws allowed before a record slot is declared impossible to fill
MAX_DRAW_ATTEMPTS = 100

# Step of the binary budget feedback per record
BUDGET_GAIN = 0.02


@dataclass
class GeneratorConfig:
    """
    Everything the generator needs. The corpus is a pure function of it.
    A log-normal with median 9 and sigma 1.0727 has mean 16.
    """

    apps: List[AppProfile] = field(
        default_factory=lambda: copy.deepcopy(catalog.DEFAULT_APPS)
    )
    pool_weights: Dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_POOL_WEIGHTS)
    )
    class_weights: Dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_CLASS_WEIGHTS)
    )
    depth_median: float = 9.0
    depth_sigma: float = 1.0727
    max_depth: int = MAX_DEPTH
    records: int = 10000
    seed: int = 0
    window_days: int = 14
    start_ts: int = DEFAULT_START_TS
    duplicate_fraction: float = 0.0
    offset_rate: float = 0.25
    skip_prefix_rate: float = 0.145
    deep_blame_rate: float = 0.08
    overflow_leaf_rate: float = 0.5
    crash_prone_rate: float = 0.7
    app_reporter_rate: float = 0.3
    binaries_target: float = 4.0

    @classmethod
    def from_dict(cls, content):
        """
        Overlay a (possibly partial) mapping on the defaults.
        """
        content = content or {}
        try:
            jsonschema.validate(instance=content, schema=generator_config_schema)
        except jsonschema.ValidationError as e:
            raise InvalidConfigError("generator config: %s" % e.message)
        values = dict(content)
        if "apps" in values:
            values["apps"] = [AppProfile.from_dict(app) for app in values["apps"]]
        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def load(cls, path):
        return cls.from_dict(utils.read_yaml(path))

    def to_dict(self):
        content = {
            "apps": [app.to_dict() for app in self.apps],
            "pool_weights": dict(self.pool_weights),
            "class_weights": dict(self.class_weights),
        }
        for name in (
            "depth_median",
            "depth_sigma",
            "max_depth",
            "records",
            "seed",
            "window_days",
            "start_ts",
            "duplicate_fraction",
            "offset_rate",
            "skip_prefix_rate",
            "deep_blame_rate",
            "overflow_leaf_rate",
            "crash_prone_rate",
            "app_reporter_rate",
            "binaries_target",
        ):
            content[name] = getattr(self, name)
        return content

    @property
    def digest(self):
        encoded = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(encoded.encode("utf-8"), digest_size=8).hexdigest()

    def validate(self):
        if self.records < 1:
            raise InvalidConfigError("record count must be at least 1")
        if self.binaries_target < 1:
            raise InvalidConfigError("binaries_target must be at least 1")
        if not self.apps:
            raise InvalidConfigError("the app catalog is empty")
        for app in self.apps:
            if not app.binaries or not app.methods:
                raise InvalidConfigError(
                    "app %s needs at least one binary and one method" % app.name
                )
        _check_weights("pool_weights", self.pool_weights, catalog.POOLS)
        _check_weights("class_weights", self.class_weights, PROBLEM_CLASSES)
        if not 1 <= self.max_depth <= MAX_DEPTH:
            raise InvalidConfigError("max_depth must be in [1, %s]" % MAX_DEPTH)
        if self.class_weights.get(STACK_OVERFLOW, 0) > 0 and self.max_depth < 3:
            raise InvalidConfigError("stack overflows need max_depth of at least 3")
        if self.records - int(round(self.records * self.duplicate_fraction)) < 1:
            raise InvalidConfigError("duplicate_fraction leaves no original records")
        rates = self.skip_prefix_rate + self.deep_blame_rate
        if rates > 1:
            raise InvalidConfigError(
                "skip_prefix_rate + deep_blame_rate must not exceed 1, got %s" % rates
            )


def _check_weights(name, weights, known):
    unknown = sorted(set(weights) - set(known))
    if unknown:
        raise InvalidConfigError("%s has unknown keys: %s" % (name, ", ".join(unknown)))
    if any(w < 0 for w in weights.values()):
        raise InvalidConfigError("%s must be non-negative" % name)
    total = sum(weights.values())
    if not math.isclose(total, 1.0, abs_tol=1e-6):
        raise InvalidConfigError("%s must sum to 1, got %s" % (name, total))


def _by_binary(frames):
    """
    Group frame strings of a pool by binary, keeping catalog order.
    """
    groups = {}
    for frame in frames:
        groups.setdefault(binary_of(frame), []).append(frame)
    return groups


def binary_of(frame):
    return frame.split("!", 1)[0] if "!" in frame else ""


def top_half(depth):
    """
    Longest prefix that keeps the frame below it in the top half of the stack.
    """
    return (depth - 1) // 2


class StackBuilder:
    """
    Draws one record at a time from a per-record random generator. The only
    state kept between records is the binary budget shift.
    """

    def __init__(self, config):
        self.config = config
        self.classes = [c for c in PROBLEM_CLASSES if c in config.class_weights]
        self.class_p = self._normalized(config.class_weights, self.classes)
        self.pools = [p for p in catalog.POOLS if config.pool_weights.get(p, 0) > 0]
        self.pool_p = self._normalized(config.pool_weights, self.pools)
        self.blame_pools = [catalog.APP, catalog.DRIVER]
        self.blame_p = self._normalized(config.pool_weights, self.blame_pools)
        self.skip_pools = list(catalog.SKIP_POOLS)
        self.skip_p = self._normalized(config.pool_weights, self.skip_pools)
        by_pool = {
            catalog.DRIVER: _by_binary(catalog.DRIVER_FRAMES),
            catalog.SYSTEM: _by_binary(catalog.SYSTEM_FRAMES),
            catalog.STDLIB: _by_binary(catalog.STDLIB_FRAMES),
        }
        self.groups = {pool: list(groups.values()) for pool, groups in by_pool.items()}
        self.frames_of = {}
        for groups in by_pool.values():
            self.frames_of.update(groups)
        self.budget_shift = 0.0

    @staticmethod
    def _normalized(weights, keys):
        values = np.array([weights.get(k, 0.0) for k in keys], dtype=float)
        if values.sum() <= 0:
            return np.full(len(keys), 1.0 / len(keys))
        return values / values.sum()

    @staticmethod
    def pick(rng, items):
        return items[int(rng.integers(len(items)))]

    def sample_depth(self, rng):
        c = self.config
        depth = c.depth_median * math.exp(c.depth_sigma * rng.standard_normal())
        return int(min(max(np.rint(depth), 1), c.max_depth))

    def timestamp(self, rng):
        span = self.config.window_days * SECONDS_PER_DAY
        return self.config.start_ts + int(rng.integers(span))

    # Frames

    def app_frame(self, app, rng, crash_prone=False, binary=None):
        binary = binary or self.pick(rng, app.binaries)
        namespace = self.pick(rng, app.namespaces) if app.namespaces else ""
        methods = app.methods
        if crash_prone and app.crash_prone_methods:
            methods = app.crash_prone_methods
        method = self.pick(rng, methods)
        if namespace:
            return "%s!%s::%s" % (binary, namespace, method)
        return "%s!%s" % (binary, method)

    def reporter_frame(self, app, rng, binary=None):
        if binary is None:
            if not app.wrapper_binaries or rng.random() < self.config.app_reporter_rate:
                binary = self.pick(rng, app.binaries)
            else:
                binary = self.pick(rng, app.wrapper_binaries)
        return "%s!%s" % (binary, self.pick(rng, catalog.REPORTER_SYMBOLS))

    def blame_frame(self, app, rng):
        pool = self.blame_pools[int(rng.choice(len(self.blame_pools), p=self.blame_p))]
        if pool == catalog.DRIVER:
            return self.pick(rng, catalog.DRIVER_FRAMES)
        crash_prone = rng.random() < self.config.crash_prone_rate
        return self.app_frame(app, rng, crash_prone=crash_prone)

    def skip_frame(self, app, rng):
        pool = self.skip_pools[int(rng.choice(len(self.skip_pools), p=self.skip_p))]
        if pool == catalog.WRAPPER:
            return self.reporter_frame(app, rng)
        if pool == catalog.SYSTEM:
            return self.pick(rng, catalog.SYSTEM_FRAMES)
        return self.pick(rng, catalog.STDLIB_FRAMES)

    def app_run(self, app, rng, binary, length):
        return [
            self.app_frame(
                app,
                rng,
                crash_prone=rng.random() < BACKGROUND_CRASH_PRONE_RATE,
                binary=binary,
            )
            for _ in range(length)
        ]

    def body_run(self, app, rng):
        """
        A short run of frames from one binary of one pool.
        """
        pool = self.pools[int(rng.choice(len(self.pools), p=self.pool_p))]
        length = int(rng.integers(1, 4))
        if pool == catalog.APP:
            return self.app_run(app, rng, self.pick(rng, app.binaries), length)
        if pool == catalog.WRAPPER:
            return [self.reporter_frame(app, rng)]
        group = self.pick(rng, self.groups[pool])
        return [self.pick(rng, group) for _ in range(length)]

    def reuse_run(self, app, present, rng):
        """
        A short run from a binary the stack already holds. Falls back to a
        fresh run when none of them has frames to draw from.
        """
        known = set(app.binaries) | set(app.wrapper_binaries) | set(self.frames_of)
        candidates = sorted(b for b in present if b in known)
        if not candidates:
            return self.body_run(app, rng)
        binary = self.pick(rng, candidates)
        length = int(rng.integers(1, 4))
        if binary in app.binaries:
            return self.app_run(app, rng, binary, length)
        if binary in app.wrapper_binaries:
            return [self.reporter_frame(app, rng, binary=binary)]
        return [self.pick(rng, self.frames_of[binary]) for _ in range(length)]

    def binary_budget(self, rng):
        target = self.config.binaries_target
        return 1 + int(rng.poisson(max(0.0, target - 1 + self.budget_shift)))

    def observe(self, record):
        """
        Move the budget toward the configured mean after an accepted record.
        """
        target = self.config.binaries_target
        achieved = len({f.binary for f in record.stack if f.binary})
        shift = self.budget_shift + BUDGET_GAIN * (target - achieved)
        self.budget_shift = min(max(shift, 1 - target), target)

    # Patterns: each returns (frames, blame_index) with len(frames) <= depth,
    # except overflows, which grow to fit three repetitions

    def generic(self, app, depth, rng):
        c = self.config
        u = rng.random()
        if depth >= 3 and u < c.deep_blame_rate:
            skipped = int(rng.integers(math.ceil((depth - 1) / 2), depth))
        elif u < c.deep_blame_rate + c.skip_prefix_rate:
            skipped = min(int(rng.integers(1, 4)), top_half(depth))
        else:
            skipped = 0
        prefix = [self.skip_frame(app, rng) for _ in range(skipped)]
        return prefix + [self.blame_frame(app, rng)], skipped

    def heap_corruption(self, app, depth, rng):
        prefix = list(catalog.HEAP_FRAMES[: int(rng.integers(2, 5))])
        if rng.random() < 0.5:
            prefix.append("ucrtbase.dll!free_base")
        prefix = prefix[: top_half(depth)]
        return prefix + [self.blame_frame(app, rng)], len(prefix)

    def cpp_exception(self, app, depth, rng):
        helpers = list(catalog.EXCEPTION_HELPERS[: int(rng.integers(1, 4))])
        helpers = helpers[: top_half(depth)]
        if rng.random() < 0.4:
            thrower = self.pick(rng, catalog.STDLIB_THROWERS)
        else:
            thrower = self.app_frame(
                app, rng, crash_prone=rng.random() < self.config.crash_prone_rate
            )
        return helpers + [thrower], len(helpers)

    def stack_overflow(self, app, depth, rng):
        c = self.config
        leaf = []
        if rng.random() < c.overflow_leaf_rate:
            leaf = [self.skip_frame(app, rng) for _ in range(int(rng.integers(1, 3)))]
        cycle = [self.app_frame(app, rng) for _ in range(int(rng.integers(1, 4)))]
        if len(leaf) + 3 * len(cycle) > c.max_depth:
            leaf, cycle = [], cycle[:1]
        repeats = max(3, (depth - len(leaf) - 2) // len(cycle))
        repeats = min(repeats, (c.max_depth - len(leaf)) // len(cycle))
        return leaf + cycle * repeats, len(leaf)

    def fill(self, frames, depth, app, rng):
        """
        Pad a pattern to depth with body runs and the thread start frames.
        Runs bring in new binaries until the record's budget is spent and
        reuse the stack's binaries after that.
        """
        missing = depth - len(frames)
        if missing <= 0:
            return frames
        tail = list(catalog.THREAD_START_FRAMES) if missing >= 3 else []
        budget = self.binary_budget(rng)
        present = {binary_of(f) for f in frames + tail} - {""}
        body = []
        while len(body) < missing - len(tail):
            if len(present) < budget:
                run = self.body_run(app, rng)
            else:
                run = self.reuse_run(app, present, rng)
            body.extend(run)
            present.update(binary_of(f) for f in run)
        return frames + body[: missing - len(tail)] + tail

    def add_offsets(self, frames, rng):
        """
        Give a share of distinct frames a return offset; repeats share it.
        """
        offsets = {}
        for frame in frames:
            if frame in offsets:
                continue
            offset = None
            if rng.random() < self.config.offset_rate:
                offset = int(rng.integers(0x10, 0x100000))
            offsets[frame] = offset
        return [
            frame if offsets[frame] is None else "%s+0x%x" % (frame, offsets[frame])
            for frame in frames
        ]

    def build(self, rng):
        app = self.pick(rng, self.config.apps)
        problem_class = self.classes[int(rng.choice(len(self.classes), p=self.class_p))]
        depth = self.sample_depth(rng)

        if problem_class == HEAP_CORRUPTION:
            frames, blame_index = self.heap_corruption(app, depth, rng)
        elif problem_class == CPP_EXCEPTION:
            frames, blame_index = self.cpp_exception(app, depth, rng)
        elif problem_class == STACK_OVERFLOW:
            frames, blame_index = self.stack_overflow(app, depth, rng)
        else:
            frames, blame_index = self.generic(app, depth, rng)

        frames = self.add_offsets(self.fill(frames, depth, app, rng), rng)
        return CrashRecord.from_frames(
            frames,
            problem_class=problem_class,
            app=app.name,
            timestamp=self.timestamp(rng),
            blame_index=blame_index,
        )


def generate_synthetic(config):
    """
    Generate a corpus. Original records are pairwise distinct; the forced
    duplicates (duplicate_fraction) are exact copies with new timestamps,
    appended after the originals.
    """
    config.validate()
    n_duplicates = int(round(config.records * config.duplicate_fraction))
    n_originals = config.records - n_duplicates

    seeds = np.random.SeedSequence(config.seed).spawn(n_originals + 1)
    builder = StackBuilder(config)
    seen = set()
    records = []
    for i in range(n_originals):
        rng = np.random.default_rng(seeds[i])
        for _ in range(MAX_DRAW_ATTEMPTS):
            record = builder.build(rng)
            digest = record_hash(record)
            if digest not in seen:
                break
        else:
            raise InvalidConfigError(
                "could not draw a distinct record after %s attempts; "
                "the catalog is too small for %s records"
                % (MAX_DRAW_ATTEMPTS, config.records)
            )
        seen.add(digest)
        builder.observe(record)
        records.append(record)

    rng = np.random.default_rng(seeds[-1])
    for _ in range(n_duplicates):
        original = records[int(rng.integers(n_originals))]
        records.append(replace(original, timestamp=builder.timestamp(rng)))

    logger.debug(
        "generated %s records (%s duplicates) with seed %s"
        % (len(records), n_duplicates, config.seed)
    )
    source = "generator:seed=%s:config=%s" % (config.seed, config.digest)
    return Corpus(records=records, source=source)
