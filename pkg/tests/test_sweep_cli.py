"""Tests for parameter sweeps, crossover search, serialization, and the CLI."""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from stellar_qfi.cli import main
from stellar_qfi.strategies import DI, INFINITE, LOCAL_HET, TELEPORT
from stellar_qfi.sweep import (
    CROSSOVER_FIELDS,
    CSV_FIELDS,
    FIGURE_IDS,
    CrossoverQuery,
    SweepError,
    SweepSpec,
    figure_preset,
    find_crossover,
    read_csv_rows,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    scan_crossovers,
)


class TestSweepSpec:
    def test_defaults_are_valid(self):
        spec = SweepSpec()
        assert spec.axis == "eta"
        assert len(spec.axis_values()) == spec.count

    def test_log_spacing(self):
        spec = SweepSpec(axis_min=1e-3, axis_max=1.0, count=4, spacing="log")
        values = spec.axis_values()
        ratios = values[1:] / values[:-1]
        assert np.allclose(ratios, ratios[0])

    def test_rejects_bad_axis(self):
        with pytest.raises(ValueError, match="axis"):
            SweepSpec(axis="zeta")

    def test_rejects_bad_strategy(self):
        with pytest.raises(ValueError, match="strategy"):
            SweepSpec(strategies=("di", "osmosis"))

    def test_rejects_empty_strategies(self):
        with pytest.raises(ValueError, match="nonempty"):
            SweepSpec(strategies=())

    def test_rejects_small_count(self):
        with pytest.raises(ValueError, match="count"):
            SweepSpec(count=1)

    def test_rejects_inverted_range(self):
        with pytest.raises(ValueError):
            SweepSpec(axis_min=0.9, axis_max=0.1)

    def test_rejects_log_from_zero(self):
        with pytest.raises(ValueError, match="log"):
            SweepSpec(axis_min=0.0, spacing="log")


class TestRunSweep:
    def test_row_layout_and_count(self):
        spec = SweepSpec(count=3, r_values=(1.0, INFINITE))
        rows = run_sweep(spec)
        # 3 axis points x (di + local_het + teleport at two r values)
        assert len(rows) == 3 * 4
        assert [row.strategy for row in rows[:4]] == [DI, LOCAL_HET, TELEPORT, TELEPORT]

    def test_inapplicable_columns_are_nan(self):
        rows = run_sweep(SweepSpec(count=2))
        by_strategy = {row.strategy: row for row in rows}
        assert math.isnan(by_strategy[DI].r)
        assert math.isnan(by_strategy[LOCAL_HET].r)
        assert math.isnan(by_strategy[LOCAL_HET].eta)
        assert math.isinf(by_strategy[TELEPORT].r)
        # gamma = 1 by default: the gamma entry is out of domain.
        assert math.isnan(by_strategy[DI].j_gamma_per_photon)

    def test_local_het_rows_do_not_depend_on_eta(self):
        rows = run_sweep(SweepSpec(strategies=(LOCAL_HET,), count=5))
        values = {row.j_phi_per_photon for row in rows}
        assert len(values) == 1

    def test_per_photon_normalization(self):
        rows = run_sweep(SweepSpec(strategies=(DI,), count=2, gamma=1.0, epsilon=0.3))
        at_full = [row for row in rows if row.axis_value == 1.0][0]
        # Per-photon phase information of lossless DI at unit coherence is 1.
        assert at_full.j_phi_per_photon == pytest.approx(1.0, rel=1e-12)

    def test_r_axis_sweeps_teleport_squeezing(self):
        spec = SweepSpec(strategies=(TELEPORT,), axis="r", axis_min=0.0,
                         axis_max=2.0, count=3, gamma=0.95)
        rows = run_sweep(spec)
        assert [row.r for row in rows] == [0.0, 1.0, 2.0]
        assert rows[0].j_phi_per_photon < rows[-1].j_phi_per_photon

    def test_error_names_the_grid_point(self):
        spec = SweepSpec(strategies=(DI,), axis="eta", axis_min=0.0, axis_max=1.0, count=2)
        with pytest.raises(SweepError, match="eta=0"):
            run_sweep(spec)


class TestSerialization:
    def test_csv_is_deterministic(self):
        spec = SweepSpec(count=4, r_values=(1.0, INFINITE))
        assert rows_to_csv(run_sweep(spec)) == rows_to_csv(run_sweep(spec))

    def test_csv_header_and_round_trip(self):
        rows = run_sweep(SweepSpec(count=3))
        text = rows_to_csv(rows)
        assert text.splitlines()[0] == ",".join(CSV_FIELDS)
        parsed = read_csv_rows(text)
        assert len(parsed) == len(rows)
        for row, record in zip(rows, parsed):
            assert record["strategy"] == row.strategy
            assert record["axis_value"] == row.axis_value  # exact via .17e
            if math.isnan(row.j_gamma_per_photon):
                assert math.isnan(record["J_gamma_per_photon"])
            else:
                assert record["J_gamma_per_photon"] == row.j_gamma_per_photon

    def test_special_values_render_as_tokens(self):
        rows = run_sweep(SweepSpec(count=2))
        text = rows_to_csv(rows)
        assert ",inf," in text  # infinite squeezing in the r column
        assert ",nan," in text  # inapplicable columns

    def test_json_carries_identical_values(self):
        rows = run_sweep(SweepSpec(count=3, gamma=0.9))
        records = json.loads(rows_to_json(rows))
        for row, record in zip(rows, records):
            assert record["J_phi_per_photon"] == row.j_phi_per_photon
            assert record["epsilon"] == row.epsilon


class TestCrossover:
    def test_query_validation(self):
        with pytest.raises(ValueError):
            CrossoverQuery(TELEPORT, DI, 0.3, 1.0, 0.5, 0.2)
        with pytest.raises(ValueError, match="quantity"):
            CrossoverQuery(TELEPORT, DI, 0.3, 1.0, 0.1, 0.9, quantity="j_theta")
        with pytest.raises(ValueError, match="strategy"):
            CrossoverQuery("nope", DI, 0.3, 1.0, 0.1, 0.9)

    def test_teleport_di_crossing_is_bracket_independent(self):
        base = dict(strategy_a=TELEPORT, strategy_b=DI, epsilon=0.3, gamma=1.0)
        narrow = find_crossover(CrossoverQuery(eta_lo=0.2, eta_hi=0.3, **base))
        wide = find_crossover(CrossoverQuery(eta_lo=0.05, eta_hi=0.9, **base))
        assert abs(narrow - wide) < 2e-6
        assert 0.22 <= narrow <= 0.24

    def test_no_sign_change_raises(self):
        query = CrossoverQuery(TELEPORT, DI, 0.3, 1.0, 0.5, 0.9)
        with pytest.raises(ValueError, match="no sign change"):
            find_crossover(query)

    def test_scan_finds_the_single_crossing(self):
        query = CrossoverQuery(TELEPORT, LOCAL_HET, 0.3, 1.0, 0.05, 0.9)
        crossings = scan_crossovers(query, count=60)
        assert len(crossings) == 1
        assert 0.10 <= crossings[0] <= 0.12


class TestFigurePresets:
    @pytest.mark.parametrize("figure_id", FIGURE_IDS)
    def test_presets_are_well_formed(self, figure_id):
        specs, queries = figure_preset(figure_id)
        assert specs
        for spec in specs:
            assert isinstance(spec, SweepSpec)
        for query in queries:
            assert isinstance(query, CrossoverQuery)

    def test_unknown_figure_rejected(self):
        with pytest.raises(ValueError, match="figure id"):
            figure_preset("7")

    def test_figure_3_preset_has_both_crossover_queries(self):
        _, queries = figure_preset("3")
        pairs = {(q.strategy_a, q.strategy_b) for q in queries}
        assert pairs == {(TELEPORT, DI), (TELEPORT, LOCAL_HET)}


class TestCli:
    def run(self, *args, env=None):
        return CliRunner().invoke(main, list(args), env=env, catch_exceptions=False)

    def test_sweep_to_stdout(self):
        result = self.run("sweep", "--count", "3", "--strategies", "di")
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == ",".join(CSV_FIELDS)
        assert len(result.output.splitlines()) == 4

    def test_sweep_to_file(self, tmp_path):
        out = tmp_path / "table.csv"
        result = self.run("sweep", "--count", "3", "--strategies", "di",
                          "--output", str(out))
        assert result.exit_code == 0
        assert out.exists()
        assert read_csv_rows(out.read_text())

    def test_sweep_json_format(self):
        result = self.run("sweep", "--count", "2", "--strategies", "local_het",
                          "--format", "json")
        assert result.exit_code == 0
        assert json.loads(result.output)

    def test_sweep_rejects_bad_flag_value(self):
        result = CliRunner().invoke(main, ["sweep", "--count", "1"])
        assert result.exit_code != 0
        assert "count" in result.output

    def test_config_file_supplies_settings(self, tmp_path):
        config = tmp_path / "sweep.cfg"
        config.write_text("count = 3\nstrategies = di\ngamma = 0.9  # partial coherence\n")
        result = self.run("sweep", "--config", str(config))
        rows = read_csv_rows(result.output)
        assert len(rows) == 3
        assert rows[0]["gamma"] == 0.9

    def test_flag_overrides_config(self, tmp_path):
        config = tmp_path / "sweep.cfg"
        config.write_text("count = 3\nstrategies = di\ngamma = 0.9\n")
        result = self.run("sweep", "--config", str(config), "--gamma", "0.5")
        rows = read_csv_rows(result.output)
        assert rows[0]["gamma"] == 0.5

    def test_config_rejects_malformed_line(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("count: 3\n")
        result = CliRunner().invoke(main, ["sweep", "--config", str(config)])
        assert result.exit_code != 0
        assert "key = value" in result.output

    def test_crossover_command(self):
        result = self.run("crossover", "--strategy-a", "teleport", "--strategy-b", "di",
                          "--epsilon", "0.3", "--gamma", "1.0",
                          "--eta-lo", "0.15", "--eta-hi", "0.35")
        assert result.exit_code == 0
        value = float(result.output.split("=")[1])
        assert 0.22 <= value <= 0.24

    def test_crossover_writes_csv(self, tmp_path):
        out = tmp_path / "cross.csv"
        result = self.run("crossover", "--eta-lo", "0.15", "--eta-hi", "0.35",
                          "--output", str(out))
        assert result.exit_code == 0
        text = out.read_text()
        assert text.splitlines()[0] == ",".join(CROSSOVER_FIELDS)

    def test_crossover_failure_exits_nonzero(self):
        result = CliRunner().invoke(
            main, ["crossover", "--eta-lo", "0.5", "--eta-hi", "0.9"]
        )
        assert result.exit_code != 0
        assert "no sign change" in result.output

    def test_figure_writes_files(self, tmp_path):
        result = self.run("figure", "3", "--output-dir", str(tmp_path))
        assert result.exit_code == 0
        assert (tmp_path / "figure_3.csv").exists()
        companion = tmp_path / "figure_3_crossovers.csv"
        assert companion.exists()
        crossings = read_csv_rows(companion.read_text())
        values = sorted(row["eta_cross"] for row in crossings)
        assert abs(values[0] - 0.11) <= 0.01
        assert abs(values[1] - 0.23) <= 0.01

    def test_output_dir_env_var(self, tmp_path):
        result = self.run("sweep", "--count", "2", "--strategies", "di",
                          "--output", "sub/table.csv",
                          env={"STELLAR_QFI_OUTPUT_DIR": str(tmp_path)})
        assert result.exit_code == 0
        assert (tmp_path / "sub" / "table.csv").exists()

    def test_verify_command_passes(self):
        result = self.run("verify")
        assert result.exit_code == 0
        assert "PASS" in result.output
        assert "FAIL" not in result.output
