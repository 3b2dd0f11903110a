"""Command-line renderer: one invocation per figure preset."""

from __future__ import annotations

from pathlib import Path

import click

from .presets import FIGURE_IDS, PRESETS
from .render import SchemaError, render


@click.command()
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--input-dir", default=".", show_default=True,
              help="Directory holding figure_<id>.csv (and _crossovers.csv).")
@click.option("--output", default=None,
              help="Image path; defaults to figure_<id>.<format> in the input dir.")
@click.option("--format", "image_format", default="png", show_default=True,
              type=click.Choice(["png", "pdf", "svg"]))
@click.option("--strategies", default=None,
              help="Comma list restricting the plotted strategies.")
def main(figure_id, input_dir, output, image_format, strategies):
    """Render one figure from the sweep CSVs written by `stellar-qfi figure`."""
    input_dir = Path(input_dir)
    sweep_csv = input_dir / f"figure_{figure_id}.csv"
    if not sweep_csv.exists():
        raise click.ClickException(f"missing input CSV {sweep_csv}")
    crossover_csv = input_dir / f"figure_{figure_id}_crossovers.csv"
    destination = Path(output) if output else input_dir / f"figure_{figure_id}.{image_format}"
    selection = None
    if strategies is not None:
        selection = tuple(s.strip() for s in strategies.split(",") if s.strip())
    try:
        result = render(
            PRESETS[figure_id],
            sweep_csv,
            destination,
            crossover_csv=crossover_csv if crossover_csv.exists() else None,
            strategies=selection,
        )
    except (SchemaError, ValueError) as err:
        raise click.ClickException(str(err)) from None
    click.echo(f"wrote {result.path}")


if __name__ == "__main__":
    main()
