"""usc_figures: presentation layer over usc-lab result files."""

from .data import FigureDataError, split_by_flag
from .render import KINDS, FigureJob, render

__all__ = ["FigureDataError", "FigureJob", "KINDS", "render", "split_by_flag"]

__version__ = "0.1.0"
