"""Tests for the arma-rg command line."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import pytest

from arma_rg.cli import build_parser, main
from arma_rg.const import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, MANIFEST_SUFFIX


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def _last_json(stderr: str) -> dict[str, Any]:
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    result: dict[str, Any] = json.loads(lines[-1])
    return result


class TestParser:
    """Tests for argument parsing."""

    def test_unset_flags_are_none(self) -> None:
        args = build_parser().parse_args(["simulate", "--eta", "2"])
        assert args.eta == 2.0
        assert args.kappa is None
        assert args.stationary is None

    def test_comma_lists(self) -> None:
        args = build_parser().parse_args(["decimate", "--phi", "2,-1", "--nu", "0.5"])
        assert args.phi == [2.0, -1.0]
        assert args.nu == [0.5]

    def test_bad_list(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, err = _run(capsys, "decimate", "--phi", "2,x")
        assert code == EXIT_CONFIG
        assert out == ""
        report = _last_json(err)
        assert report["error"] == "ConfigError"
        assert report["field"] == "phi"
        assert "comma-separated numbers" in report["message"]

    def test_command_required(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(capsys)
        assert code == EXIT_CONFIG
        assert _last_json(err)["field"] == "command"

    def test_invalid_choice(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(capsys, "exactify", "--format", "xml")
        assert code == EXIT_CONFIG
        assert _last_json(err)["field"] == "format"

    def test_unknown_flag(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(capsys, "flow", "--bogus", "1")
        assert code == EXIT_CONFIG
        assert "unrecognized arguments" in _last_json(err)["message"]


class TestExactify:
    """Tests for `arma-rg exactify`."""

    def test_integrated_ou(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, err = _run(capsys, "exactify", "--eta", "1", "--svv2", "2", "--tau", "0.01")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["exact"]["psi"] == pytest.approx(1.0 + math.exp(-0.01), rel=1e-12)
        assert payload["exact"]["theta"] == pytest.approx(-math.exp(-0.01), rel=1e-12)
        assert payload["euler"]["phi"] == pytest.approx([1.99, -0.99])
        assert set(payload) == {"sde", "tau", "exact", "small_tau", "euler", "fixed_point"}
        assert _last_json(err)["manifest"]["command"] == "exactify"

    def test_csv_flattens(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "exactify", "--eta", "1", "--format", "csv")
        assert code == EXIT_OK
        (row,) = _rows(out)
        assert float(row["exact.psi"]) == pytest.approx(1.0 + math.exp(-0.01))
        assert row["fixed_point.class"] == "D"

    def test_sampling_node_is_numerical_failure(
        self, capsys: pytest.CaptureFixture[str]
    ) -> None:
        code, out, err = _run(
            capsys,
            "exactify",
            "--kappa", "1",
            "--eta", "0",
            "--svv2", "1",
            "--tau", "3.141592653589793",
        )  # fmt: skip
        assert code == EXIT_NUMERICAL
        assert out == ""
        report = _last_json(err)
        assert report["error"] == "DegenerateSamplingError"


class TestFlow:
    """Tests for `arma-rg flow`."""

    def test_euler_orbit_reaches_inertial_fixed_point(
        self, capsys: pytest.CaptureFixture[str]
    ) -> None:
        code, out, _ = _run(capsys, "flow", "--iterations", "20")
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 21
        assert rows[0]["alpha_3"] == "1.0"
        assert float(rows[-1]["alpha_3"]) == pytest.approx(2.0 / 3.0, abs=1e-9)
        assert float(rows[-1]["beta_3"]) == pytest.approx(1.0 / 6.0, abs=1e-9)
        assert {row["divergent"] for row in rows} == {"0"}

    def test_fixed_point_orbit_is_constant(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "flow", "--initial", "fixed-point", "--kind", "A", "--s", "0.5",
            "--iterations", "3",
        )  # fmt: skip
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 4
        for row in rows:
            assert float(row["alpha_0"]) == pytest.approx(0.5, abs=1e-12)

    def test_divergent_orbit(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "flow", "--initial", "coefficients", "--psi", "3", "--theta", "0",
            "--alpha", "1", "--iterations", "200",
        )  # fmt: skip
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) < 201
        assert rows[-1]["divergent"] == "1"

    def test_too_many_coefficients(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(
            capsys, "flow", "--initial", "coefficients", "--psi", "2,0,0,0,0", "--K", "3"
        )
        assert code == EXIT_CONFIG
        assert _last_json(err)["field"] == "psi"

    def test_invalid_fixed_point(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(
            capsys, "flow", "--initial", "fixed-point", "--kind", "A", "--u", "1"
        )
        assert code == EXIT_CONFIG
        assert _last_json(err)["error"] == "InvalidParameterError"


class TestClassifyDecimate:
    """Tests for `arma-rg classify` and `arma-rg decimate`."""

    def test_euler_is_class_d(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "classify")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["verdict"] == "D"
        assert payload["fixed_point"]["class"] == "D"

    def test_decimate_arma32(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "decimate", "--phi", "0.5,0.2,0.1", "--nu", "0.3,0.2", "--mu", "1"
        )
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["before"]["phi"] == [0.5, 0.2, 0.1]
        assert len(payload["after"]["phi"]) == 3
        assert len(payload["after"]["nu"]) == 2
        assert payload["steps"] == [{"p": 3, "q": 2, "q_rule": 2}]


class TestSimulate:
    """Tests for `arma-rg simulate` and manifest replay."""

    def test_integrated_noise(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "simulate", "--scheme", "arma", "--phi", "2,-1", "--mu", "1e-3", "--n", "1000"
        )
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 1000
        assert rows[-1]["n"] == "999"

    def test_manifest_replay_is_byte_identical(
        self, capsys: pytest.CaptureFixture[str], tmp_path: Path
    ) -> None:
        first = tmp_path / "first.csv"
        code, _, _ = _run(
            capsys, "simulate", "--scheme", "exact", "--eta", "1", "--tau", "0.01",
            "--n", "500", "--seed", "7", "--output", str(first),
        )  # fmt: skip
        assert code == EXIT_OK
        manifest_path = first.with_name(first.name + MANIFEST_SUFFIX)
        manifest = json.loads(manifest_path.read_text())
        assert manifest["seed"] == 7
        assert manifest["config"]["n"] == 500

        second = tmp_path / "second.csv"
        code, _, _ = _run(
            capsys, "simulate", "--config", str(manifest_path), "--output", str(second)
        )
        assert code == EXIT_OK
        assert second.read_bytes() == first.read_bytes()

    def test_invalid_length(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, err = _run(capsys, "simulate", "--n", "0")
        assert code == EXIT_CONFIG
        assert out == ""
        report = _last_json(err)
        assert report["error"] == "ConfigError"
        assert report["field"] == "n"

    def test_bad_config_file(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        path = tmp_path / "run.json"
        path.write_text('{\n  "n": \n}\n')
        code, _, err = _run(capsys, "simulate", "--config", str(path))
        assert code == EXIT_CONFIG
        assert _last_json(err)["line"] == 3


class TestInfer:
    """Tests for `arma-rg infer`."""

    def test_from_series_file(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        series = tmp_path / "series.json"
        code, _, _ = _run(
            capsys, "simulate", "--eta", "1", "--tau", "0.01", "--n", "50000", "--seed", "3",
            "--format", "json", "--output", str(series),
        )  # fmt: skip
        assert code == EXIT_OK
        code, out, _ = _run(capsys, "infer", "--input", str(series))
        assert code == EXIT_OK
        (row,) = _rows(out)
        assert row["scheme"] == "euler"
        assert row["tau"] == "0.01"
        assert 0.3 < float(row["eta_hat"]) < 1.0

    def test_csv_input_without_tau_default(
        self, capsys: pytest.CaptureFixture[str], tmp_path: Path
    ) -> None:
        path = tmp_path / "series.csv"
        path.write_text("n,x\n0,abc\n")
        code, _, err = _run(capsys, "infer", "--input", str(path))
        assert code == EXIT_CONFIG
        assert _last_json(err)["error"] == "CodecError"

    def test_quartic_rejects_input(
        self, capsys: pytest.CaptureFixture[str], tmp_path: Path
    ) -> None:
        code, _, err = _run(
            capsys, "infer", "--likelihood", "quartic", "--input", str(tmp_path / "x.csv")
        )
        assert code == EXIT_CONFIG
        assert _last_json(err)["field"] == "input"

    def test_tau_sweep(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "infer", "--taus", "0.01,0.02", "--n", "20000", "--replicas", "2",
            "--workers", "2",
        )  # fmt: skip
        assert code == EXIT_OK
        rows = _rows(out)
        assert [row["tau"] for row in rows] == ["0.01", "0.02"]
        assert {row["replicas"] for row in rows} == {"2"}
        assert all(float(row["eta_se"]) > 0 for row in rows)


class TestExperiment:
    """Tests for `arma-rg experiment`."""

    def test_fixed_points(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "experiment", "fixed-points")
        assert code == EXIT_OK
        rows = _rows(out)
        assert {row["class"] for row in rows} == {"A", "B", "C", "D"}
        assert max(float(row["residual"]) for row in rows) < 1e-10

    def test_inertial_flow(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "experiment", "inertial-flow", "--iterations", "25")
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 26
        assert float(rows[1]["alpha3"]) == pytest.approx(0.75, abs=1e-12)
        assert float(rows[1]["beta3"]) == pytest.approx(0.125, abs=1e-12)
        for row in rows:
            assert float(row["alpha3"]) == pytest.approx(float(row["alpha3_closed"]), abs=1e-12)
        assert float(rows[-1]["alpha3"]) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_rg_invariance(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "experiment", "rg-invariance", "--taus", "0.1")
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 20
        assert max(float(row["residual_exact"]) for row in rows) < 1e-7
        assert min(float(row["residual_euler"]) for row in rows) > 1e-6

    def test_euler_bias(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(
            capsys, "experiment", "euler-bias", "--taus", "0.01", "--n", "50000",
            "--replicas", "2",
        )  # fmt: skip
        assert code == EXIT_OK
        (row,) = _rows(out)
        assert row["scheme"] == "euler"
        assert 0.4 < float(row["eta_ratio"]) < 0.95

    def test_memory_rule(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "experiment", "memory-rule", "--max-order", "3")
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 3 * 4
        for row in rows:
            assert row["q_measured"] == row["q_rule"] == row["q_decimated"]
            assert float(row["tail"]) < 1e-9

    def test_basin(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, out, _ = _run(capsys, "experiment", "basin", "--resolution", "5")
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 25
        assert {row["verdict"] for row in rows} <= {"A", "B", "C", "D", "divergent", "unresolved"}

    def test_name_from_config(self, capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"name": "basin", "resolution": 2}))
        code, out, _ = _run(capsys, "experiment", "--config", str(path), "--format", "json")
        assert code == EXIT_OK
        assert len(json.loads(out)["rows"]) == 4

    def test_missing_name(self, capsys: pytest.CaptureFixture[str]) -> None:
        code, _, err = _run(capsys, "experiment")
        assert code == EXIT_CONFIG
        assert _last_json(err)["field"] == "name"
