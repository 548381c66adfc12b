"""Publication-style figures rendered from stepflow CSV outputs.

This package talks to the numerical library only through its published
file formats (CSV tables and snapshot grids); it never imports it.
"""

from figures.spec import FigureSpec, SpecError, load_spec
from figures.table import Table, TableError, read_table
from figures.render import KINDS, render

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "KINDS",
    "SpecError",
    "Table",
    "TableError",
    "load_spec",
    "read_table",
    "render",
]
