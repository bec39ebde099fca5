"""Turns sweep summary CSVs from the simulation harness into line figures."""

from .figures import (
    FIGURE_AXES,
    FigureSpec,
    MissingColumnError,
    build_figure,
    extract_series,
    figure_spec,
    load_summary,
    render_figure,
    scheme_styles,
)

__all__ = [
    "FIGURE_AXES",
    "FigureSpec",
    "MissingColumnError",
    "build_figure",
    "extract_series",
    "figure_spec",
    "load_summary",
    "render_figure",
    "scheme_styles",
]
