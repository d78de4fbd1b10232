"""Figure regeneration for simulator CSV outputs: multi-panel population
and fidelity plots plus the decay-rate fidelity heatmap."""

from .csvio import Grid, SchemaError, TimeSeries, load_grid, load_timeseries
from .render import FigureSpec, render

__version__ = "0.1.0"
