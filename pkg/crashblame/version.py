# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

__version__ = "0.1.0"
AUTHOR = "crashblame developers"
NAME = "crashblame"
PACKAGE_URL = "https://github.com/crashblame/crashblame"
KEYWORDS = "crash localization, stack traces, sequence labeling, crf"
DESCRIPTION = "Localize the blamed frame in symbolized crash stacks."
LICENSE = "LICENSE-MIT"

################################################################################
# Global requirements

INSTALL_REQUIRES = (
    ("pyaml", {"min_version": None}),
    ("jsonschema", {"min_version": None}),
    ("numpy", {"min_version": "1.20.0"}),
    ("scipy", {"min_version": "1.6.0"}),
    # token counting, L2 normalization and the linear baseline
    ("scikit-learn", {"min_version": "1.0"}),
)

TESTS_REQUIRES = (("pytest", {"min_version": "4.6.2"}),)

################################################################################
# Submodule Requirements (versions that include database)

INSTALL_REQUIRES_ALL = INSTALL_REQUIRES + TESTS_REQUIRES
