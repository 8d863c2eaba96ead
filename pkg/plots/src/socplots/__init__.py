"""Figure rendering for soclab CSV outputs."""

from .render import FigureJob, SchemaError, render

__version__ = "0.1.0"
