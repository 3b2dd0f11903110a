"""Figure rendering for stellar-qfi sweep CSV data."""

from .presets import CROSSOVER_COLUMNS, FIGURE_IDS, PRESETS, SWEEP_COLUMNS, FigurePreset
from .render import RenderResult, SchemaError, read_crossover_csv, read_sweep_csv, render

__version__ = "0.1.0"

__all__ = [
    "CROSSOVER_COLUMNS",
    "FIGURE_IDS",
    "PRESETS",
    "SWEEP_COLUMNS",
    "FigurePreset",
    "RenderResult",
    "SchemaError",
    "read_crossover_csv",
    "read_sweep_csv",
    "render",
]
