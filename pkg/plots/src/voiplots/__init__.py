"""Figure rendering for the sensor-polling simulator's CSV outputs."""

from .render import (
    PlotJob,
    SchemaError,
    load_cdfs,
    load_selection,
    plot_cdfs,
    plot_selection,
    render_all,
)

__all__ = [
    "PlotJob",
    "SchemaError",
    "load_cdfs",
    "load_selection",
    "plot_cdfs",
    "plot_selection",
    "render_all",
]
