"""Decay-figure renderer for zkdamper CSV/JSON outputs."""

__version__ = "0.1.0"

from .render import PlotJob, SchemaError, render_decay

__all__ = ["PlotJob", "SchemaError", "render_decay"]
