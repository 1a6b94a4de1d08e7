"""Figure rendering for adosim CSV outputs."""

__version__ = "0.1.0"

from .figures import FIGURE_IDS, FigureSpec, SchemaError, load_csv, render
