# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import functools
import logging as _logging
import os
import sys
import threading
import time

# ANSI foreground colors per level name
LEVEL_COLORS = {
    "DEBUG": 34,
    "INFO": 32,
    "WARNING": 33,
    "ERROR": 31,
    "CRITICAL": 31,
}


class ColorizingStreamHandler(_logging.StreamHandler):
    """
    Stream handler that colors a message by level when writing to a terminal.
    """

    def __init__(self, nocolor=False, stream=sys.stderr):
        super().__init__(stream=stream)
        self._lock = threading.Lock()
        self.color = not nocolor and self.stream_is_terminal()

    def stream_is_terminal(self):
        if os.environ.get("TERM") == "dumb" or os.name == "nt":
            return False
        isatty = getattr(self.stream, "isatty", None)
        return bool(isatty and isatty())

    def format(self, record):
        message = super().format(record)
        color = LEVEL_COLORS.get(record.levelname)
        if self.color and color:
            return "\033[%dm%s\033[0m" % (color, message)
        return message

    def emit(self, record):
        with self._lock:
            try:
                self.stream.write(self.format(record) + self.terminator)
                self.flush()
            except BrokenPipeError:
                raise
            except Exception:
                self.handleError(record)


class Logger:
    """
    Messages travel as dicts through a list of handlers, so a caller can add
    its own (e.g., to collect training curves) next to the console.
    """

    def __init__(self):
        self.logger = _logging.getLogger("crashblame")
        self.handlers = [self.console]
        self.stream_handler = None
        self.quiet = False

    def emit(self, level, **fields):
        fields["level"] = level
        for handler in self.handlers:
            handler(fields)

    def set_stream_handler(self, stream_handler):
        if self.stream_handler is not None:
            self.logger.removeHandler(self.stream_handler)
        self.stream_handler = stream_handler
        self.logger.addHandler(stream_handler)

    def debug(self, msg):
        self.emit("debug", msg=msg)

    def info(self, msg):
        self.emit("info", msg=msg)

    def warning(self, msg):
        self.emit("warning", msg=msg)

    def error(self, msg):
        self.emit("error", msg=msg)

    def progress(self, done, total, what="steps"):
        self.emit("progress", done=done, total=total, what=what)

    def epoch(self, epoch, loss, accuracy, waited, patience):
        self.emit(
            "epoch",
            epoch=epoch,
            loss=loss,
            accuracy=accuracy,
            waited=waited,
            patience=patience,
        )

    def console(self, fields):
        level = fields["level"]
        if level in ("info", "progress", "epoch") and self.quiet:
            return
        if level == "progress":
            share = fields["done"] / fields["total"] if fields["total"] else 1.0
            self.logger.info(
                "%s of %s %s (%.0f%%) done"
                % (fields["done"], fields["total"], fields["what"], 100 * share)
            )
        elif level == "epoch":
            self.logger.info(
                "epoch %s: loss %.4f, validation accuracy %.4f (patience %s/%s)"
                % (
                    fields["epoch"],
                    fields["loss"],
                    fields["accuracy"],
                    fields["waited"],
                    fields["patience"],
                )
            )
        else:
            getattr(self.logger, level)(fields["msg"])


logger = Logger()


def setup_logger(quiet=False, nocolor=False, stdout=False, debug=False):
    logger.set_stream_handler(
        ColorizingStreamHandler(nocolor=nocolor, stream=sys.stdout if stdout else sys.stderr)
    )
    logger.logger.setLevel(_logging.DEBUG if debug else _logging.INFO)
    logger.quiet = quiet


def log_duration(label):
    """
    Log how long the wrapped call took. Durations never go into results.
    """

    def decorator(func):
        @functools.wraps(func)
        def timed(*args, **kwargs):
            start = time.time()
            result = func(*args, **kwargs)
            logger.info("%s took %.1f seconds" % (label, time.time() - start))
            return result

        return timed

    return decorator
