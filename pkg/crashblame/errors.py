# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)


class CrashBlameError(Exception):
    """
    Base for errors the client turns into an exit code.
    """

    exit_code = 2


class UsageError(CrashBlameError):
    exit_code = 1


class CorpusFormatError(CrashBlameError):
    """
    A corpus file line could not be read. Carries the line number when known.
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None and lineno is not None:
            where = "%s:%s: " % (path, lineno)
        elif lineno is not None:
            where = "line %s: " % lineno
        super().__init__(where + message)


class InvalidRecordError(CrashBlameError, ValueError):
    pass


class InvalidConfigError(CrashBlameError, ValueError):
    pass


class ModelFormatError(CrashBlameError):
    pass


class TrainingError(CrashBlameError):
    pass
