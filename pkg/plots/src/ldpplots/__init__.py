"""Batch figure rendering for simulation result CSVs."""

from .render import PlotSpec, PlotError, load_rows, render

__all__ = ["PlotSpec", "PlotError", "load_rows", "render"]
