"""Command-line interface: sweeps, crossover search, verification, figure data.

Every numeric parameter can come from a flag or from a key-value config file
(`key = value` lines, # comments); flags win.  The default output directory
is taken from STELLAR_QFI_OUTPUT_DIR when set, else the working directory.
"""

from __future__ import annotations

import math
import os
import sys
from pathlib import Path

import click

from . import verify as verify_module
from .strategies import INFINITE
from .sweep import (
    AXES,
    CROSSOVER_FIELDS,
    FIGURE_IDS,
    STRATEGIES,
    CrossoverQuery,
    SweepError,
    SweepSpec,
    crossover_record,
    figure_rows,
    find_crossover,
    rows_to_csv,
    rows_to_json,
    run_sweep,
)

OUTPUT_DIR_ENV = "STELLAR_QFI_OUTPUT_DIR"


def _output_dir():
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _read_config(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _setting(name, flag_value, config, convert=str, default=None):
    """Flag wins over config file, which wins over the default."""
    if flag_value is not None:
        return flag_value
    if name in config:
        try:
            return convert(config[name])
        except ValueError as err:
            raise click.ClickException(f"config key {name}: {err}") from None
    return default


def _parse_r(text):
    if text.strip().lower() in ("inf", "infinite", "infinity"):
        return INFINITE
    return float(text)


def _parse_strategies(text):
    strategies = tuple(s.strip() for s in text.split(",") if s.strip())
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}; choose from {','.join(STRATEGIES)}")
    return strategies


def _parse_r_list(text):
    return tuple(_parse_r(part) for part in text.split(",") if part.strip())


def _write(path, text):
    path = Path(path)
    if not path.is_absolute():
        path = _output_dir() / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


@click.group()
def main():
    """Fisher-information comparison of stellar interferometry strategies."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key-value config file; flags override its entries.")
@click.option("--strategies", default=None, help="Comma list from di,local_het,teleport.")
@click.option("--axis", type=click.Choice(AXES), default=None)
@click.option("--axis-min", type=float, default=None)
@click.option("--axis-max", type=float, default=None)
@click.option("--count", type=int, default=None)
@click.option("--spacing", type=click.Choice(["linear", "log"]), default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--phi", type=float, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--r-values", default=None,
              help="Comma list of teleport squeezing values; 'inf' allowed.")
@click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=None)
@click.option("--output", default=None, help="Output file; '-' or omitted prints to stdout.")
def sweep(config_path, strategies, axis, axis_min, axis_max, count, spacing,
          epsilon, gamma, phi, eta, r_values, output_format, output):
    """Sweep one axis and emit the flat per-photon Fisher table."""
    config = _read_config(config_path) if config_path else {}
    try:
        spec = SweepSpec(
            strategies=_setting("strategies", strategies and _parse_strategies(strategies),
                                config, _parse_strategies, STRATEGIES),
            axis=_setting("axis", axis, config, str, "eta"),
            axis_min=_setting("axis_min", axis_min, config, float, 0.01),
            axis_max=_setting("axis_max", axis_max, config, float, 1.0),
            count=_setting("count", count, config, int, 50),
            spacing=_setting("spacing", spacing, config, str, "linear"),
            epsilon=_setting("epsilon", epsilon, config, float, 0.3),
            gamma=_setting("gamma", gamma, config, float, 1.0),
            phi=_setting("phi", phi, config, float, math.pi / 4),
            eta=_setting("eta", eta, config, float, 1.0),
            r_values=_setting("r_values", r_values and _parse_r_list(r_values),
                              config, _parse_r_list, (INFINITE,)),
        )
        rows = run_sweep(spec)
    except (ValueError, SweepError) as err:
        raise click.ClickException(str(err)) from None
    fmt = _setting("format", output_format, config, str, "csv")
    text = rows_to_json(rows) if fmt == "json" else rows_to_csv(rows)
    destination = _setting("output", output, config, str, None)
    if destination in (None, "-"):
        click.echo(text, nl=False)
    else:
        click.echo(f"wrote {_write(destination, text)}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--strategy-a", default=None)
@click.option("--strategy-b", default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--phi", type=float, default=None)
@click.option("--r", default=None, help="Teleport squeezing; 'inf' allowed.")
@click.option("--eta-lo", type=float, default=None)
@click.option("--eta-hi", type=float, default=None)
@click.option("--quantity", type=click.Choice(["j_phi", "j_gamma"]), default=None)
@click.option("--tolerance", type=float, default=None)
@click.option("--output", default=None, help="Optional CSV file for the result.")
def crossover(config_path, strategy_a, strategy_b, epsilon, gamma, phi, r,
              eta_lo, eta_hi, quantity, tolerance, output):
    """Bisect the transmission where two strategies' per-photon curves cross."""
    config = _read_config(config_path) if config_path else {}
    try:
        query = CrossoverQuery(
            strategy_a=_setting("strategy_a", strategy_a, config, str, "teleport"),
            strategy_b=_setting("strategy_b", strategy_b, config, str, "di"),
            epsilon=_setting("epsilon", epsilon, config, float, 0.3),
            gamma=_setting("gamma", gamma, config, float, 1.0),
            phi=_setting("phi", phi, config, float, math.pi / 4),
            r=_setting("r", r and _parse_r(r), config, _parse_r, INFINITE),
            eta_lo=_setting("eta_lo", eta_lo, config, float, 0.05),
            eta_hi=_setting("eta_hi", eta_hi, config, float, 0.95),
            quantity=_setting("quantity", quantity, config, str, "j_phi"),
            tolerance=_setting("tolerance", tolerance, config, float, 1e-6),
        )
        eta_cross = find_crossover(query)
    except ValueError as err:
        raise click.ClickException(str(err)) from None
    click.echo(f"eta_cross = {eta_cross:.17e}")
    if output is not None:
        text = rows_to_csv([crossover_record(query, eta_cross)], fields=CROSSOVER_FIELDS)
        click.echo(f"wrote {_write(output, text)}")


@main.command()
def verify():
    """Run every oracle-equivalence and invariant check; exit 1 on failure."""
    results = verify_module.run_all()
    click.echo(verify_module.format_report(results))
    if not all(res.passed for res in results):
        sys.exit(1)


@main.command()
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--output-dir", default=None,
              help=f"Destination directory; defaults to ${OUTPUT_DIR_ENV} or '.'.")
def figure(figure_id, output_dir):
    """Emit the sweep CSV (and crossover companion) for one figure preset."""
    directory = Path(output_dir) if output_dir else _output_dir()
    try:
        rows, crossings = figure_rows(figure_id)
    except (ValueError, SweepError) as err:
        raise click.ClickException(str(err)) from None
    csv_path = directory / f"figure_{figure_id}.csv"
    click.echo(f"wrote {_write(csv_path, rows_to_csv(rows))}")
    if crossings:
        cross_path = directory / f"figure_{figure_id}_crossovers.csv"
        click.echo(f"wrote {_write(cross_path, rows_to_csv(crossings, fields=CROSSOVER_FIELDS))}")


if __name__ == "__main__":
    main()
