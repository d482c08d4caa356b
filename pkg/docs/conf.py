#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# crashblame documentation build configuration file.

import os
import sys

from recommonmark.parser import CommonMarkParser

source_parsers = {".md": CommonMarkParser}

sys.path.insert(0, os.path.abspath("../"))

from crashblame.version import __version__ as version  # noqa

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinxcontrib.napoleon",
    "sphinxarg.ext",
    "sphinx.ext.autosectionlabel",
]

templates_path = ["_templates"]
source_suffix = [".rst", ".md"]
master_doc = "index"

project = "crashblame"
copyright = "2022, crashblame developers"
release = version

language = "en"
exclude_patterns = ["_build", "env"]
pygments_style = "sphinx"
todo_include_todos = False

# -- HTML -----------------------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_options = {
    "collapse_navigation": False,
    "navigation_depth": 3,
}
html_static_path = []
htmlhelp_basename = "crashblamedoc"

# -- LaTeX, man and texinfo ----------------------------------------------

latex_documents = [
    ("index", "crashblame.tex", "crashblame Documentation", "crashblame developers", "manual"),
]

man_pages = [("index", "crashblame", "crashblame Documentation", ["crashblame developers"], 1)]

texinfo_documents = [
    (
        "index",
        "crashblame",
        "crashblame Documentation",
        "crashblame developers",
        "crashblame",
        "Localize the blamed frame in symbolized crash stacks.",
        "Miscellaneous",
    ),
]


def setup(app):
    app.add_css_file("sphinx-argparse.css")
