"""Offline figure rendering for alleelab CSV outputs."""

__version__ = "0.1.0"

from .render import plot_branch, plot_twopar, render  # noqa: F401
from .spec import FigureSpec, parse_spec  # noqa: F401
