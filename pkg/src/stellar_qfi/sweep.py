"""Parameter sweeps, crossover root-finding, and delimited output.

The flat row schema

    axis,axis_value,strategy,r,eta,epsilon,gamma,J_phi_per_photon,J_gamma_per_photon

serves every figure: one row per (axis value, strategy, squeezing) with
per-photon normalization J / epsilon.  Columns that do not apply to a
strategy (r for direct interferometry, r and eta for local heterodyne)
hold nan; J_gamma_per_photon holds nan at gamma = 1 where the gamma entry
is out of domain.  Infinite squeezing is written as inf in the r column.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .strategies import (
    DI,
    INFINITE,
    LOCAL_HET,
    TELEPORT,
    LinkParams,
    StellarParams,
    di_qfi,
    local_heterodyne_fi,
    teleport_qfi_closed,
    teleport_qfi_infinite_squeezing,
)

CSV_FIELDS = (
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

AXES = ("eta", "r", "gamma", "epsilon")
STRATEGIES = (DI, LOCAL_HET, TELEPORT)
CROSSOVER_FIELDS = ("quantity", "strategy_a", "strategy_b", "epsilon", "gamma", "r", "eta_cross")


class SweepError(ValueError):
    """A sweep aborted; the message names the offending grid point."""


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    strategy: str
    r: float
    eta: float
    epsilon: float
    gamma: float
    j_phi_per_photon: float
    j_gamma_per_photon: float

    def as_record(self):
        return {
            "axis": self.axis,
            "axis_value": self.axis_value,
            "strategy": self.strategy,
            "r": self.r,
            "eta": self.eta,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
            "J_phi_per_photon": self.j_phi_per_photon,
            "J_gamma_per_photon": self.j_gamma_per_photon,
        }


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: fixed parameters plus a single swept axis.

    ``r_values`` lists the teleportation squeezing levels (finite values
    and/or INFINITE); it is ignored when r itself is the swept axis.
    """

    strategies: tuple = STRATEGIES
    axis: str = "eta"
    axis_min: float = 0.01
    axis_max: float = 1.0
    count: int = 50
    spacing: str = "linear"
    epsilon: float = 0.3
    gamma: float = 1.0
    phi: float = math.pi / 4
    eta: float = 1.0
    r_values: tuple = (INFINITE,)

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}; choose from {STRATEGIES}")
        if not self.strategies:
            raise ValueError("strategy set must be nonempty")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.count < 2:
            raise ValueError(f"count must be >= 2, got {self.count}")
        if not self.axis_min < self.axis_max:
            raise ValueError(f"need axis_min < axis_max, got [{self.axis_min}, {self.axis_max}]")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and self.axis_min <= 0:
            raise ValueError("log spacing requires axis_min > 0")

    def axis_values(self):
        if self.spacing == "log":
            return np.geomspace(self.axis_min, self.axis_max, self.count)
        return np.linspace(self.axis_min, self.axis_max, self.count)


def evaluate_strategy(strategy, params, eta=1.0, r=INFINITE):
    """Fisher diagonal of one strategy at one grid point."""
    if strategy == DI:
        return di_qfi(params, eta)
    if strategy == LOCAL_HET:
        return local_heterodyne_fi(params)
    if strategy == TELEPORT:
        if math.isinf(r):
            return teleport_qfi_infinite_squeezing(params, eta)
        return teleport_qfi_closed(params, LinkParams(eta, r))
    raise ValueError(f"unknown strategy {strategy!r}")


def _point(spec, axis_value):
    """Resolve (params, eta, r-list) at one axis value."""
    epsilon, gamma, eta = spec.epsilon, spec.gamma, spec.eta
    r_values = spec.r_values
    if spec.axis == "eta":
        eta = axis_value
    elif spec.axis == "gamma":
        gamma = axis_value
    elif spec.axis == "epsilon":
        epsilon = axis_value
    elif spec.axis == "r":
        r_values = (axis_value,)
    return StellarParams(epsilon, gamma, spec.phi), eta, r_values


def run_sweep(spec):
    """Evaluate the sweep; rows are axis-major, strategy-minor, deterministic."""
    rows = []
    for axis_value in spec.axis_values():
        axis_value = float(axis_value)
        params, eta, r_values = _point(spec, axis_value)
        for strategy in spec.strategies:
            variants = r_values if strategy == TELEPORT else (math.nan,)
            for r in variants:
                try:
                    result = evaluate_strategy(strategy, params, eta=eta, r=r)
                except (ValueError, ArithmeticError) as err:
                    raise SweepError(
                        f"sweep aborted at {spec.axis}={axis_value:.6g}, "
                        f"strategy={strategy}: {err}"
                    ) from err
                j_gamma = result.j_gamma
                rows.append(
                    SweepRow(
                        axis=spec.axis,
                        axis_value=axis_value,
                        strategy=strategy,
                        r=r,
                        eta=math.nan if strategy == LOCAL_HET else eta,
                        epsilon=params.epsilon,
                        gamma=params.gamma,
                        j_phi_per_photon=result.j_phi / params.epsilon,
                        j_gamma_per_photon=(
                            math.nan if j_gamma is None else j_gamma / params.epsilon
                        ),
                    )
                )
    return rows


def _format_value(value):
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf"
    return format(value, ".17e")


def rows_to_csv(rows, fields=CSV_FIELDS):
    """Render rows as CSV text; byte-identical for identical input."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        record = row.as_record() if hasattr(row, "as_record") else row
        writer.writerow({k: _format_value(v) for k, v in record.items()})
    return buffer.getvalue()


def rows_to_json(rows):
    """Render rows as JSON carrying the same numeric values as the CSV."""
    records = [row.as_record() if hasattr(row, "as_record") else row for row in rows]
    return json.dumps(records, indent=2) + "\n"


_TEXT_FIELDS = ("axis", "strategy", "quantity", "strategy_a", "strategy_b")


def read_csv_rows(text):
    """Parse CSV text produced by rows_to_csv back into value dictionaries."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for record in reader:
        parsed = {}
        for key, value in record.items():
            parsed[key] = value if key in _TEXT_FIELDS else float(value)
        rows.append(parsed)
    return rows


@dataclass(frozen=True)
class CrossoverQuery:
    """Bisection query for the transmission where two strategies' curves cross."""

    strategy_a: str
    strategy_b: str
    epsilon: float
    gamma: float
    eta_lo: float
    eta_hi: float
    r: float = INFINITE
    phi: float = math.pi / 4
    quantity: str = "j_phi"
    tolerance: float = 1e-6

    def __post_init__(self):
        for s in (self.strategy_a, self.strategy_b):
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")
        if not 0.0 <= self.eta_lo < self.eta_hi <= 1.0:
            raise ValueError(f"need 0 <= eta_lo < eta_hi <= 1, got [{self.eta_lo}, {self.eta_hi}]")
        if self.quantity not in ("j_phi", "j_gamma"):
            raise ValueError(f"quantity must be 'j_phi' or 'j_gamma', got {self.quantity!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


def _per_photon(query, strategy, eta):
    params = StellarParams(query.epsilon, query.gamma, query.phi)
    result = evaluate_strategy(strategy, params, eta=eta, r=query.r)
    value = result.j_phi if query.quantity == "j_phi" else result.j_gamma
    if value is None:
        raise ValueError(f"{query.quantity} is out of domain at gamma = {query.gamma}")
    return value / query.epsilon


def find_crossover(query):
    """Bisect the per-photon Fisher difference of two strategies over eta."""
    def difference(eta):
        return _per_photon(query, query.strategy_a, eta) - _per_photon(
            query, query.strategy_b, eta
        )

    lo, hi = query.eta_lo, query.eta_hi
    f_lo, f_hi = difference(lo), difference(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise ValueError(
            f"no sign change in bracket [{lo}, {hi}]: "
            f"difference is {f_lo:.6e} at eta={lo} and {f_hi:.6e} at eta={hi}"
        )
    while hi - lo > query.tolerance:
        mid = 0.5 * (lo + hi)
        f_mid = difference(mid)
        if f_mid == 0.0:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_crossovers(query, count=200, spacing="linear"):
    """All crossings in the bracket, located by grid scan plus bisection."""
    if spacing == "log":
        grid = np.geomspace(query.eta_lo, query.eta_hi, count)
    else:
        grid = np.linspace(query.eta_lo, query.eta_hi, count)
    values = [
        _per_photon(query, query.strategy_a, float(eta))
        - _per_photon(query, query.strategy_b, float(eta))
        for eta in grid
    ]
    crossings = []
    for lo, hi, f_lo, f_hi in zip(grid, grid[1:], values, values[1:]):
        if f_lo == 0.0:
            crossings.append(float(lo))
        elif math.copysign(1.0, f_lo) != math.copysign(1.0, f_hi):
            crossings.append(
                find_crossover(replace(query, eta_lo=float(lo), eta_hi=float(hi)))
            )
    return crossings


def crossover_record(query, eta_cross):
    return {
        "quantity": query.quantity,
        "strategy_a": query.strategy_a,
        "strategy_b": query.strategy_b,
        "epsilon": query.epsilon,
        "gamma": query.gamma,
        "r": query.r,
        "eta_cross": eta_cross,
    }


FIGURE_IDS = ("2a", "2b", "3", "4", "5", "6")

_FIG2_EPSILONS = (1e-3, 1e-2, 1e-1, 1.0)
_FIG4_EPSILONS = (1e-3, 1e-2, 1e-1, 0.3, 1.0)


def figure_preset(figure_id):
    """Sweep specs and crossover queries pinned to the comparison figures.

    Returns (sweep specs, crossover queries); the CLI concatenates the sweep
    rows into one CSV and writes the located crossings to a companion CSV.
    """
    if figure_id == "2a":
        specs = [
            SweepSpec(axis="r", axis_min=0.0, axis_max=4.0, count=41, epsilon=e, gamma=1.0)
            for e in _FIG2_EPSILONS
        ]
        return specs, []
    if figure_id == "2b":
        specs = [
            SweepSpec(axis="r", axis_min=0.0, axis_max=4.0, count=41, epsilon=e, gamma=0.95)
            for e in _FIG2_EPSILONS
        ]
        return specs, []
    if figure_id == "3":
        specs = [
            SweepSpec(
                axis="eta",
                axis_min=0.01,
                axis_max=1.0,
                count=100,
                epsilon=0.3,
                gamma=1.0,
                r_values=(1.0, 2.0, INFINITE),
            )
        ]
        queries = [
            CrossoverQuery(TELEPORT, DI, 0.3, 1.0, 0.15, 0.35),
            CrossoverQuery(TELEPORT, LOCAL_HET, 0.3, 1.0, 0.05, 0.2),
        ]
        return specs, queries
    if figure_id == "4":
        specs = [
            SweepSpec(
                axis="eta",
                axis_min=1e-4,
                axis_max=1.0,
                count=61,
                spacing="log",
                epsilon=e,
                gamma=1.0,
            )
            for e in _FIG4_EPSILONS
        ]
        # eta_hi stops short of 1, where teleportation with infinite squeezing
        # degenerates to direct interferometry and the difference vanishes.
        queries = [
            CrossoverQuery(TELEPORT, other, e, 1.0, 1e-4, 0.9)
            for e in _FIG4_EPSILONS
            for other in (DI, LOCAL_HET)
        ]
        return specs, queries
    if figure_id == "5":
        specs = [
            SweepSpec(
                axis="gamma",
                axis_min=0.05,
                axis_max=0.95,
                count=46,
                epsilon=0.3,
                eta=eta,
            )
            for eta in (1.0, 0.8)
        ]
        return specs, []
    if figure_id == "6":
        specs = [
            SweepSpec(
                axis="eta",
                axis_min=0.01,
                axis_max=1.0,
                count=100,
                epsilon=0.3,
                gamma=0.95,
                r_values=(1.0, 2.0, INFINITE),
            )
        ]
        specs += [
            SweepSpec(
                axis="eta",
                axis_min=1e-3,
                axis_max=0.3,
                count=40,
                spacing="log",
                epsilon=e,
                gamma=0.95,
            )
            for e in (0.01, 0.1)
        ]
        # The bracket stops at 0.9: at eta = 1 infinite-squeezing teleportation
        # coincides with direct interferometry, and the vanishing difference
        # would register as a spurious crossing.
        queries = [
            CrossoverQuery(TELEPORT, DI, e, 0.95, 1e-3, 0.9, quantity="j_gamma")
            for e in (0.01, 0.1, 0.3)
        ]
        return specs, queries
    raise ValueError(f"unknown figure id {figure_id!r}; choose from {FIGURE_IDS}")


def figure_rows(figure_id):
    """All sweep rows and crossover records for one figure preset."""
    specs, queries = figure_preset(figure_id)
    rows = []
    for spec in specs:
        rows.extend(run_sweep(spec))
    crossings = []
    for query in queries:
        # Crossings sit at eta of order epsilon, so scan on a log grid to
        # resolve them for weak fields.
        spacing = "log" if query.eta_lo > 0 else "linear"
        for eta_cross in scan_crossovers(query, count=400, spacing=spacing):
            crossings.append(crossover_record(query, eta_cross))
    return rows, crossings
