"""Figures for walkgossip metrics CSVs: curves with mean +- std bands."""

from .figures import FigureSpec, GroupCurve, PlotError, aggregate, plot, read_rows

__version__ = "0.1.0"

__all__ = ["FigureSpec", "GroupCurve", "PlotError", "aggregate", "plot", "read_rows"]
