"""Figures from mobstab's delimited-text run outputs.

This package reads only the documented CSV files a finished run
directory contains; it never imports the analysis code, so the two
packages version independently.
"""

from .figures import KINDS, FigureRequest, render
from .schema import EmptyInput, FigureError, SchemaMismatch

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "FigureRequest",
    "render",
    "EmptyInput",
    "FigureError",
    "SchemaMismatch",
    "__version__",
]
