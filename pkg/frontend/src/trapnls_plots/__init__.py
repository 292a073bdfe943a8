"""Figure rendering for solver run artifacts."""

from .render import FigureSpec, SchemaError, parse_figure_spec, render

__version__ = "0.1.0"
