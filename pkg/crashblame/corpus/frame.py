# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# A frame is one symbolized line of a crash stack: binary!namespace::method+0xOFF

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

OFFSET_REGEX = re.compile(r"\+0x([0-9a-fA-F]+)$")

# Brackets that may hold "::" without ending a namespace segment
OPENERS = {"<": ">", "[": "]", "(": ")"}
CLOSERS = {v: k for k, v in OPENERS.items()}

UNKNOWN = "unknown"


@dataclass(frozen=True)
class Frame:
    binary: str = ""
    namespace: str = ""
    method: str = ""
    offset: Optional[int] = None
    raw: str = ""

    def __post_init__(self):
        if self.offset is not None and self.offset < 0:
            raise ValueError("frame offset must be non-negative, got %s" % self.offset)
        if not self.raw:
            object.__setattr__(self, "raw", render_frame(self))

    @property
    def unknown_binary(self):
        return not self.binary or self.binary.lower() == UNKNOWN

    @property
    def unknown_method(self):
        return not self.method or self.method.lower() == UNKNOWN

    @property
    def is_empty(self):
        return not self.binary and not self.namespace and not self.method

    @property
    def symbol(self):
        if self.namespace:
            return "%s::%s" % (self.namespace, self.method)
        return self.method

    @property
    def method_key(self):
        """
        Identity of the method across stacks (binary included, offset ignored).
        """
        return "%s!%s" % (self.binary, self.symbol)

    def __str__(self):
        return self.raw


def split_symbol(symbol):
    """
    Split a symbol on its last top-level "::" into (namespace, method).
    Separators inside template or bracket arguments are not split points.
    """
    depth = 0
    split_at = -1
    i = 0
    while i < len(symbol):
        char = symbol[i]
        if char in OPENERS:
            depth += 1
        elif char in CLOSERS and depth > 0:
            depth -= 1
        elif depth == 0 and symbol.startswith("::", i):
            split_at = i
            i += 2
            continue
        i += 1
    if split_at < 0:
        return "", symbol
    return symbol[:split_at], symbol[split_at + 2 :]


def parse_frame(text):
    """
    Parse a symbolized frame. Every non-empty string parses; text without a
    binary separator keeps its raw form and leaves all parts empty.
    """
    if text is None or not text.strip():
        raise ValueError("cannot parse an empty frame")
    raw = " ".join(text.split())

    if "!" not in raw:
        return Frame(raw=raw)

    binary, symbol = raw.split("!", 1)
    offset = None
    match = OFFSET_REGEX.search(symbol)
    if match:
        offset = int(match.group(1), 16)
        symbol = symbol[: match.start()]
    namespace, method = split_symbol(symbol)
    return Frame(
        binary=binary, namespace=namespace, method=method, offset=offset, raw=raw
    )


def format_frame(frame):
    """
    Symbolized text of a frame. A parsed frame gives back exactly the text it
    was parsed from (offset digits and a leading "::" included).
    """
    return frame.raw or render_frame(frame)


def render_frame(frame):
    """
    Canonical text built from the parts: lowercase offset without padding.
    """
    text = "%s!%s" % (frame.binary, frame.symbol)
    if frame.offset is not None:
        text += "+0x%x" % frame.offset
    return text
