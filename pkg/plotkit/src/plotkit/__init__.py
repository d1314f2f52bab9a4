"""Figure rendering for penningmd CSV outputs."""

__version__ = "0.1.0"

from .render import KINDS, FigureSpec, SchemaError, load_table, render
