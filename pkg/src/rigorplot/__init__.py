"""Correct plots of univariate real functions.

A plot is a list of pixel runs, one per column, such that the graph of the
function never passes through a blank pixel.  Column enclosures come from
Taylor models over an adaptively subdivided x-range, evaluated in
outward-rounded interval arithmetic.
"""

__version__ = "0.1.0"

from .expr import ParseError, parse
from .plotter import Plot1, Plot2, PlotConfig, PlotError, XFrame, YFrame, plot, plot_in_frame

__all__ = [
    "ParseError",
    "Plot1",
    "Plot2",
    "PlotConfig",
    "PlotError",
    "XFrame",
    "YFrame",
    "parse",
    "plot",
    "plot_in_frame",
]
