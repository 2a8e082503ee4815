"""Sphinx configuration for the Heisenberg Comparison Lab documentation."""

from __future__ import annotations

import datetime as _dt
import pathlib
import sys

PROJECT_ROOT = pathlib.Path(__file__).resolve().parents[1]
SRC_PATH = PROJECT_ROOT / "src"
sys.path.insert(0, str(SRC_PATH))

from heislab import __version__  # noqa: E402  (import after sys.path mutation)

project = "Heisenberg Comparison Lab"
author = "Heisenberg Comparison Lab contributors"
copyright = f"{_dt.datetime.now().year}, {author}"
release = __version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
]

autosummary_generate = True

templates_path: list[str] = []
exclude_patterns: list[str] = ["_build"]

html_theme = "furo"
html_static_path: list[str] = []

napoleon_numpy_docstring = True
napoleon_google_docstring = False
