"""Read sweep/crossover CSVs and render one figure per preset.

This layer is read-only over the CSVs: curves plot the tabulated values
as-is, and the only arithmetic is linear interpolation to place crossover
markers on a curve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .presets import CROSSOVER_COLUMNS, STRATEGY_LABELS, SWEEP_COLUMNS, FigurePreset


class SchemaError(ValueError):
    """The CSV does not carry the expected columns."""


_TEXT_COLUMNS = ("axis", "strategy", "quantity", "strategy_a", "strategy_b")


def _read_rows(path, expected_columns):
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [column for column in expected_columns if column not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = []
        for record in reader:
            rows.append(
                {
                    key: (value if key in _TEXT_COLUMNS else float(value))
                    for key, value in record.items()
                }
            )
    return rows


def read_sweep_csv(path):
    """Sweep rows as dictionaries with numeric columns parsed to float."""
    return _read_rows(path, SWEEP_COLUMNS)


def read_crossover_csv(path):
    """Crossover rows from the companion CSV."""
    return _read_rows(path, CROSSOVER_COLUMNS)


@dataclass(frozen=True)
class RenderResult:
    """What was drawn: output path, shaded x-span, and marker positions."""

    path: Path
    shade_span: Optional[tuple]
    crossings: tuple


def _series_label(strategy, key_values):
    label = STRATEGY_LABELS.get(strategy, strategy)
    parts = []
    for key, value in key_values:
        if value is None:
            continue
        rendered = "inf" if math.isinf(value) else f"{value:g}"
        parts.append(f"{key}={rendered}")
    return f"{label} ({', '.join(parts)})" if parts else label


def _group_series(rows, preset):
    """Split rows into curves keyed by (strategy, series-key values).

    nan entries (columns that do not apply to a strategy) are mapped to
    None so that they compare equal and the strategy stays a single curve.
    """
    series = {}
    for row in rows:
        values = tuple(
            (k, None if math.isnan(row[k]) else row[k]) for k in preset.series_keys
        )
        series.setdefault((row["strategy"], values), []).append(row)
    return series


def _interpolate(xs, ys, x):
    """Linear interpolation on the finite part of a tabulated curve."""
    xs, ys = np.asarray(xs), np.asarray(ys)
    keep = np.isfinite(ys)
    if keep.sum() < 2:
        return math.nan
    order = np.argsort(xs[keep])
    return float(np.interp(x, xs[keep][order], ys[keep][order]))


def render(preset, sweep_csv, output_path, crossover_csv=None, strategies=None):
    """Render one preset from CSV data to an image file.

    ``strategies`` optionally restricts the legend to a subset; an empty
    selection is an error rather than a blank plot.
    """
    rows = read_sweep_csv(sweep_csv)
    if strategies is not None:
        strategies = tuple(strategies)
        rows = [row for row in rows if row["strategy"] in strategies]
    if not rows:
        raise ValueError(
            f"no rows to plot for figure {preset.figure_id} "
            f"(strategy selection {strategies!r})"
        )

    crossings = []
    if crossover_csv is not None and preset.mark_crossovers:
        crossings = read_crossover_csv(crossover_csv)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (strategy, key_values), points in sorted(
        _group_series(rows, preset).items(), key=lambda item: repr(item[0])
    ):
        xs = [p["axis_value"] for p in points]
        ys = [p[preset.quantity] for p in points]
        if all(math.isnan(y) for y in ys):
            continue
        style = {"di": "--", "local_het": ":"}.get(strategy, "-")
        ax.plot(xs, ys, style, label=_series_label(strategy, key_values))

    shade_span = None
    if preset.shade_between_crossovers and len(crossings) >= 2:
        etas = sorted(c["eta_cross"] for c in crossings)
        shade_span = (etas[0], etas[-1])
        ax.axvspan(*shade_span, color="pink", alpha=0.5, zorder=0,
                   label="teleportation advantage")

    marker_positions = []
    for crossing in crossings:
        x = crossing["eta_cross"]
        # Place the star on the first curve of strategy_a with a finite
        # value at the crossing transmission.
        y = math.nan
        for (strategy, _), points in _group_series(rows, preset).items():
            if strategy != crossing["strategy_a"]:
                continue
            y = _interpolate(
                [p["axis_value"] for p in points],
                [p[preset.quantity] for p in points],
                x,
            )
            if math.isfinite(y):
                break
        marker_positions.append((x, y))
        if math.isfinite(y):
            ax.plot([x], [y], marker="*", markersize=14, color="red", zorder=5)

    ax.set_xscale(preset.x_scale)
    ax.set_yscale(preset.y_scale)
    ax.set_xlabel(preset.x_label)
    ax.set_ylabel(preset.y_label)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output_path, dpi=150)
    plt.close(fig)
    return RenderResult(output_path, shade_span, tuple(marker_positions))
