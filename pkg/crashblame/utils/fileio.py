# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import csv
import errno
import io
import json
import os
import tempfile

import yaml

from crashblame.errors import UsageError


def read_json(filename):
    with open(filename, "r") as fd:
        content = json.loads(fd.read())
    return content


def read_yaml(filename):
    if not os.path.exists(filename):
        raise UsageError("%s does not exist." % filename)
    with open(filename, "r") as fd:
        content = yaml.load(fd.read(), Loader=yaml.SafeLoader)
    return content or {}


def mkdir_p(path):
    """mkdir_p attempts to get the same functionality as mkdir -p
    :param path: the path to create.
    """
    if not path:
        return
    try:
        os.makedirs(path)
    except OSError as e:
        if e.errno == errno.EEXIST and os.path.isdir(path):
            pass
        else:
            raise UsageError("Error creating path %s." % path)


def _stage(content, filename, mode="w"):
    """
    Write content to a temporary file next to filename and return its path.
    """
    if os.path.isdir(filename):
        raise UsageError("%s is a directory" % filename)
    dirname = os.path.dirname(os.path.abspath(filename))
    mkdir_p(dirname)
    fd, tmp_file = tempfile.mkstemp(
        prefix=".%s." % os.path.basename(filename), dir=dirname
    )
    try:
        encoding = None if "b" in mode else "utf-8"
        with os.fdopen(fd, mode, encoding=encoding) as filey:
            filey.write(content)
    except BaseException:
        os.remove(tmp_file)
        raise
    return tmp_file


def write_file(content, filename, mode="w"):
    """
    Write content to a temporary file next to filename, then rename it into place.
    A failed write never leaves a partial file at filename.
    """
    os.replace(_stage(content, filename, mode), filename)
    return filename


def write_files(contents):
    """
    Write several files as one unit: contents maps filename to text. Nothing
    is renamed into place until every file has been staged, so a failure
    leaves none of them written. Returns the filenames in order.
    """
    staged = []
    try:
        for filename, content in contents.items():
            staged.append((_stage(content, filename), filename))
    except BaseException:
        for tmp_file, _ in staged:
            os.remove(tmp_file)
        raise
    for tmp_file, filename in staged:
        os.replace(tmp_file, filename)
    return list(contents)


def write_bytes(content, filename):
    return write_file(content, filename, mode="wb")


def csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(header, rows, filename):
    return write_file(csv_text(header, rows), filename)


def read_file(filename, mode="r"):
    """Read a file."""
    with open(filename, mode) as filey:
        content = filey.read()
    return content
