"""Figures from experiment sweep CSVs."""

from .figures import (
    EmptySweepError,
    FigureSpec,
    SchemaError,
    auto_specs,
    build_figure,
    render,
)

__all__ = [
    "EmptySweepError",
    "FigureSpec",
    "SchemaError",
    "auto_specs",
    "build_figure",
    "render",
]
