from __future__ import annotations

from pathlib import Path

import pandas as pd
from typer.testing import CliRunner

from heislab import __version__
from heislab.cli.main import app
from heislab.report import read_report_body
from heislab.telemetry import load_telemetry

runner = CliRunner()


def test_version_command() -> None:
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert f"heislab version: {__version__}" in result.stdout


def test_dist_on_the_horizontal_plane() -> None:
    result = runner.invoke(app, ["dist", "3", "4", "0"])
    assert result.exit_code == 0
    assert "5.0" in result.stdout


def test_dist_between_points() -> None:
    result = runner.invoke(app, ["dist", "1", "0", "0", "--between", "1", "0", "0"])
    assert result.exit_code == 0
    assert "0.0" in result.stdout


def test_verify_cutoff_writes_report_and_telemetry(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "reports" / "cutoff.csv"
    log = tmp_path / "telemetry.jsonl"
    result = runner.invoke(
        app, ["verify", "cutoff", "--out", str(out), "--telemetry-log", str(log)]
    )
    assert result.exit_code == 0, result.stdout
    assert out.exists()
    assert "Body digest:" in result.stdout
    statuses = [record.status for record in load_telemetry(log)]
    assert statuses == ["started", "passed"]

    monitor = runner.invoke(app, ["telemetry", "--log", str(log)])
    assert monitor.exit_code == 0
    assert "[passed] cutoff" in monitor.stdout
    filtered = runner.invoke(app, ["telemetry", "--log", str(log), "--suite", "pharm"])
    assert "No telemetry entries found." in filtered.stdout


def test_verify_report_body_is_reproducible(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        result = runner.invoke(app, ["verify", "cutoff", "--seed", "4", "--out", str(path)])
        assert result.exit_code == 0, result.stdout
    assert read_report_body(paths[0]) == read_report_body(paths[1])


def test_verify_json_uses_environment_output_dir(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HEISLAB_OUTPUT_DIR", str(tmp_path / "env-out"))
    result = runner.invoke(app, ["verify", "cutoff", "--format", "json"])
    assert result.exit_code == 0, result.stdout
    assert (tmp_path / "env-out" / "cutoff.json").exists()


def test_verify_exits_one_when_an_entry_fails(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "run.toml"
    config.write_text("[comparison]\nmeasure = false\n")
    result = runner.invoke(
        app,
        [
            "verify",
            "comparison",
            "--config",
            str(config),
            "--k2",
            "0",
            "--l",
            "0",
            "--tol",
            "riccati-exact=1e-300",
            "--out",
            str(tmp_path / "comparison.csv"),
        ],
    )
    assert result.exit_code == 1
    assert "FAIL" in result.stdout
    assert (tmp_path / "comparison.csv").exists()


def test_verify_usage_errors_exit_two(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    assert runner.invoke(app, ["verify", "hodge"]).exit_code == 2
    assert runner.invoke(app, ["verify", "cutoff", "--tol", "bogus=1"]).exit_code == 2
    assert runner.invoke(app, ["verify", "cutoff", "--tol", "anchor=-1"]).exit_code == 2
    assert runner.invoke(app, ["verify", "cutoff", "--format", "xml"]).exit_code == 2
    missing = tmp_path / "missing.toml"
    assert runner.invoke(app, ["verify", "cutoff", "--config", str(missing)]).exit_code == 2
    bad = tmp_path / "bad.toml"
    bad.write_text('[cutoff]\nradii = "1,-2"\n')
    result = runner.invoke(app, ["verify", "cutoff", "--config", str(bad)])
    assert result.exit_code == 2
    assert not (tmp_path / "artifacts" / "reports" / "cutoff.csv").exists()


def test_verify_logs_config_errors(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    log = tmp_path / "telemetry.jsonl"
    result = runner.invoke(
        app, ["verify", "cutoff", "--tol", "bogus=1", "--telemetry-log", str(log)]
    )
    assert result.exit_code == 2
    records = load_telemetry(log)
    assert [record.status for record in records] == ["config-error"]
    assert records[0].suite == "cutoff"
    assert "bogus" in records[0].details["error"]


def test_geodesic_command() -> None:
    result = runner.invoke(app, ["geodesic", "1", "0", "0", "--N", "32", "--restarts", "1"])
    assert result.exit_code == 0
    assert "best restart" in result.stdout
    assert runner.invoke(app, ["geodesic", "1", "0", "0", "--N", "4"]).exit_code == 2


def test_geodesic_command_reports_convergence_failure() -> None:
    result = runner.invoke(app, ["geodesic", "0", "0", "1", "--N", "16", "--restarts", "1"])
    assert result.exit_code == 1


def test_sweep_commands_write_csv(tmp_path: Path) -> None:
    profile = tmp_path / "F.csv"
    result = runner.invoke(
        app, ["sweep", "F", "--from", "0.1", "--to", "1.0", "--n", "10", "--out", str(profile)]
    )
    assert result.exit_code == 0
    assert "Wrote 10 rows" in result.stdout
    assert len(pd.read_csv(profile)) == 10

    riccati = tmp_path / "riccati.csv"
    result = runner.invoke(
        app,
        ["sweep", "riccati", "--k2", "-1", "--l", "1", "--steps", "500", "--out", str(riccati)],
    )
    assert result.exit_code == 0
    assert list(pd.read_csv(riccati).columns) == ["r", "y", "bound"]

    ratio = tmp_path / "ratio.csv"
    result = runner.invoke(
        app,
        ["sweep", "ratio", "--field", "constant:1", "--radii", "1,2", "--out", str(ratio)],
    )
    assert result.exit_code == 0
    assert pd.read_csv(ratio)["sup_ratio"].tolist() == [0.0, 0.0]


def test_sweep_argument_errors() -> None:
    assert runner.invoke(app, ["sweep", "F", "--from", "2", "--to", "1"]).exit_code == 2
    assert runner.invoke(app, ["sweep", "ratio", "--radii", "a,b"]).exit_code == 2
    assert runner.invoke(app, ["sweep", "ratio", "--field", "sphere"]).exit_code == 2


def test_telemetry_without_logs(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)
    result = runner.invoke(app, ["telemetry"])
    assert result.exit_code == 0
    assert "No telemetry entries found." in result.stdout
