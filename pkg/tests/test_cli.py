import json

import pandas as pd
import pytest

from odap_sim.cli import (
    RunManifest,
    cmd_analyze,
    cmd_calibrate,
    cmd_plot_data,
    cmd_simulate,
    cmd_sweep,
    manifest_path,
    parse_throughput,
)
from odap_sim.cli.reporting import distribution_summary, format_minutes, oda_line_path
from odap_sim.engine import read_trace
from odap_sim.errors import ConfigurationError
from odap_sim.scenario.loader import bundled_path, load_scenario
from odap_sim.sweep import summarize
from tests.conftest import synthetic_sweep_frame


class TestThroughputParsing:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("1M", 1e6),
            ("54M", 54e6),
            ("250k", 250e3),
            ("1.5G", 1.5e9),
            ("11Mbps", 11e6),
            ("2e6", 2e6),
            (100, 100.0),
        ],
    )
    def test_valid(self, text, expected):
        assert parse_throughput(text) == expected

    @pytest.mark.parametrize("text", ["fast", "0", "-1M", "1T"])
    def test_invalid(self, text):
        with pytest.raises(ConfigurationError):
            parse_throughput(text)


class TestSimulateCommand:
    def test_oda_makespan(self):
        result = cmd_simulate(pattern="ODA", seed=0)

        assert result["success"]
        assert result["makespan_s"] == pytest.approx(147.0, rel=0.05)
        assert result["pattern_id"] == 0
        assert result["produced"]["headdress"] == 85
        assert result["consistency_violations"] == 0

    def test_trace_output(self, temp_workspace):
        out = temp_workspace / "trace.csv"

        result = cmd_simulate(pattern="F6 F8", seed=1, trace_out=str(out))

        assert result["success"]
        assert result["pattern_id"] == 160
        records = read_trace(out)
        assert records
        assert all(a.time_s <= b.time_s for a, b in zip(records, records[1:]))
        assert RunManifest.load(out).command == "simulate"

    def test_bad_pattern(self):
        result = cmd_simulate(pattern="F1 F99")

        assert not result["success"]
        assert result["exit_code"] == 2

    def test_missing_scenario(self, temp_workspace):
        result = cmd_simulate(scenario=str(temp_workspace / "nope.json"))

        assert not result["success"]
        assert result["exit_code"] == 2


class TestSweepCommand:
    def test_writes_csv_and_manifest(self, temp_workspace):
        out = temp_workspace / "sweep.csv"

        result = cmd_sweep(
            str(out), throughputs=["1M"], replicates=1, patterns=["ODA", "ODAP"]
        )

        assert result["success"]
        assert result["rows"] == 2
        frame = pd.read_csv(out)
        assert frame["pattern_id"].tolist() == [0, 255]
        manifest = json.loads(manifest_path(out).read_text())
        assert manifest["plan"]["pattern_ids"] == [0, 255]
        assert len(manifest["scenario_sha256"]) == 64

    def test_refuses_to_overwrite(self, temp_workspace):
        out = temp_workspace / "sweep.csv"
        out.write_text("keep me")

        result = cmd_sweep(str(out), throughputs=["1M"], replicates=1, patterns=["ODA"])

        assert result["exit_code"] == 2
        assert out.read_text() == "keep me"

    def test_pattern_cap(self, temp_workspace):
        result = cmd_sweep(
            str(temp_workspace / "sweep.csv"), throughputs=["1M"], pattern_cap=4
        )

        assert not result["success"]
        assert result["exit_code"] == 2


class TestAnalyzeCommand:
    def test_factor_table_and_summary(self, synthetic_sweep_csv, temp_workspace):
        out = temp_workspace / "factors.csv"

        result = cmd_analyze(str(synthetic_sweep_csv), out=str(out))

        assert result["success"]
        assert result["full_factorial"]
        assert result["terms"] == 93
        names = [name for name, _ in result["significant"]]
        assert "F1" in names
        assert "F1*F2" in names
        assert (temp_workspace / "factors_summary.csv").exists()
        assert RunManifest.load(out).command == "analyze"
        assert "ODA" in result["summary_text"]

    def test_scenario_mismatch(self, synthetic_sweep_csv):
        RunManifest("sweep", "other.json", "0" * 64).finish(synthetic_sweep_csv).write(
            synthetic_sweep_csv
        )

        refused = cmd_analyze(str(synthetic_sweep_csv))
        forced = cmd_analyze(str(synthetic_sweep_csv), unsafe=True)

        assert refused["exit_code"] == 3
        assert "--unsafe" in refused["error"]
        assert forced["success"]

    def test_unknown_throughput(self, synthetic_sweep_csv):
        result = cmd_analyze(str(synthetic_sweep_csv), throughput="54M")

        assert not result["success"]
        assert result["exit_code"] == 1


class TestPlotDataCommand:
    def test_curve_and_oda_line(self, synthetic_sweep_csv, temp_workspace):
        out = temp_workspace / "curve.csv"

        result = cmd_plot_data(str(synthetic_sweep_csv), str(out))

        assert result["success"]
        assert result["points"] == 256
        curve = pd.read_csv(out)
        line = pd.read_csv(oda_line_path(out))
        assert list(curve.columns) == ["pattern_id", "makespan_s"]
        assert curve["pattern_id"].tolist() == list(range(256))
        assert line["makespan_s"].nunique() == 1
        assert line["makespan_s"].iloc[0] == pytest.approx(curve["makespan_s"].iloc[0])

    def test_empty_sweep(self, temp_workspace):
        empty = temp_workspace / "empty.csv"
        empty.write_text("")

        result = cmd_plot_data(str(empty), str(temp_workspace / "curve.csv"))

        assert not result["success"]
        assert result["exit_code"] == 3

    def test_header_only_sweep(self, temp_workspace):
        empty = temp_workspace / "empty.csv"
        synthetic_sweep_frame().head(0).to_csv(empty, index=False)

        result = cmd_plot_data(str(empty), str(temp_workspace / "curve.csv"))

        assert not result["success"]
        assert "no records" in result["error"]


class TestCalibrateCommand:
    def test_rtt_stage(self, temp_workspace):
        out = temp_workspace / "calibrated.json"

        result = cmd_calibrate(str(out), stages=("rtt",))

        assert result["success"]
        assert result["within_tolerance"]
        assert result["max_relative_error"] < 0.02
        assert load_scenario(out.read_text()).name == "case_study_fig2"

    def test_no_targets_is_passthrough(self, temp_workspace):
        targets = temp_workspace / "targets.json"
        targets.write_text("{}")
        out = temp_workspace / "calibrated.json"

        result = cmd_calibrate(str(out), targets=str(targets))

        assert result["success"]
        assert out.read_text() == bundled_path("case_study_fig2").read_text()

    def test_infeasible_targets(self, temp_workspace):
        targets = temp_workspace / "targets.json"
        targets.write_text(
            json.dumps(
                {
                    "rtt": [
                        {
                            "machine": "M1",
                            "db": "DB1",
                            "fragment": "F1",
                            "op": "read",
                            "mean_s": 0.001,
                        }
                    ]
                }
            )
        )

        result = cmd_calibrate(
            str(temp_workspace / "out.json"),
            targets=str(targets),
            free=("server_processing_s",),
        )

        assert result["exit_code"] == 1
        assert result["residuals"]

    def test_unknown_stage(self, temp_workspace):
        result = cmd_calibrate(str(temp_workspace / "out.json"), stages=("magic",))

        assert result["exit_code"] == 3


class TestReporting:
    def test_format_minutes(self):
        assert format_minutes(147.0) == "2'27''"
        assert format_minutes(float("nan")) == "-"

    def test_distribution_summary(self):
        summary = summarize(synthetic_sweep_frame(throughputs=(1e6, 1e8)))

        table = distribution_summary(summary, [f"F{i}" for i in range(1, 9)])

        assert table["throughput_bps"].tolist() == [1e8, 1e6]
        best = table.iloc[0]
        # 100 + 3*x1 + 2*x1*x2 is lowest at F1 on the databases, F2 on the product
        assert best["best_mean_s"] == pytest.approx(95.0, abs=0.1)
        assert "F1" not in best["best_product_fragments"].split()
        assert "F2" in best["best_product_fragments"].split()
        assert best["max_mean_s"] == pytest.approx(105.0, abs=0.1)
