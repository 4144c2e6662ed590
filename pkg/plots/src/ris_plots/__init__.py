"""Rendering of ris-beamsel CSV outputs into charts and tables."""

from .render import PlotSpec, RenderResult, SchemaError, render

__all__ = ["PlotSpec", "RenderResult", "SchemaError", "render"]
