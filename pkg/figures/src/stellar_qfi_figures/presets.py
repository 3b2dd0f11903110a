"""Figure presets: which columns to plot and how, per figure id.

Every preset consumes the flat sweep CSV schema

    axis,axis_value,strategy,r,eta,epsilon,gamma,J_phi_per_photon,J_gamma_per_photon

and, where crossings are drawn, the companion crossover schema

    quantity,strategy_a,strategy_b,epsilon,gamma,r,eta_cross

produced by ``stellar-qfi figure <id>``.  The plotting layer recomputes no
physics: all numbers come from the CSVs, with linear interpolation only for
placing markers on curves.
"""

from __future__ import annotations

from dataclasses import dataclass

SWEEP_COLUMNS = (
    "axis",
    "axis_value",
    "strategy",
    "r",
    "eta",
    "epsilon",
    "gamma",
    "J_phi_per_photon",
    "J_gamma_per_photon",
)

CROSSOVER_COLUMNS = (
    "quantity",
    "strategy_a",
    "strategy_b",
    "epsilon",
    "gamma",
    "r",
    "eta_cross",
)

STRATEGY_LABELS = {
    "di": "direct interferometry",
    "local_het": "local heterodyne",
    "teleport": "teleportation",
}


@dataclass(frozen=True)
class FigurePreset:
    """Declarative description of one figure.

    ``series_keys`` lists the columns (besides strategy) whose distinct
    values split the rows into separate curves; ``shade_between_crossovers``
    fills the x-interval between the two crossing transmissions read from
    the companion CSV.
    """

    figure_id: str
    quantity: str
    x_label: str
    y_label: str
    series_keys: tuple = ()
    x_scale: str = "linear"
    y_scale: str = "linear"
    shade_between_crossovers: bool = False
    mark_crossovers: bool = False

    def __post_init__(self):
        if self.quantity not in ("J_phi_per_photon", "J_gamma_per_photon"):
            raise ValueError(f"unknown quantity {self.quantity!r}")
        for key in self.series_keys:
            if key not in SWEEP_COLUMNS:
                raise ValueError(f"series key {key!r} is not a sweep column")
        for scale in (self.x_scale, self.y_scale):
            if scale not in ("linear", "log"):
                raise ValueError(f"scale must be 'linear' or 'log', got {scale!r}")


PRESETS = {
    "2a": FigurePreset(
        figure_id="2a",
        quantity="J_phi_per_photon",
        x_label="link squeezing r",
        y_label="phase information per photon",
        series_keys=("epsilon",),
        y_scale="log",
    ),
    "2b": FigurePreset(
        figure_id="2b",
        quantity="J_gamma_per_photon",
        x_label="link squeezing r",
        y_label="coherence information per photon",
        series_keys=("epsilon",),
        y_scale="log",
    ),
    "3": FigurePreset(
        figure_id="3",
        quantity="J_phi_per_photon",
        x_label="transmission eta",
        y_label="phase information per photon",
        series_keys=("r",),
        shade_between_crossovers=True,
        mark_crossovers=True,
    ),
    "4": FigurePreset(
        figure_id="4",
        quantity="J_phi_per_photon",
        x_label="transmission eta",
        y_label="phase information per photon",
        series_keys=("epsilon",),
        x_scale="log",
        y_scale="log",
        mark_crossovers=True,
    ),
    "5": FigurePreset(
        figure_id="5",
        quantity="J_gamma_per_photon",
        x_label="mutual coherence gamma",
        y_label="coherence information per photon",
        series_keys=("eta",),
        y_scale="log",
    ),
    "6": FigurePreset(
        figure_id="6",
        quantity="J_gamma_per_photon",
        x_label="transmission eta",
        y_label="coherence information per photon",
        series_keys=("r", "epsilon"),
        mark_crossovers=True,
    ),
}

FIGURE_IDS = tuple(PRESETS)
