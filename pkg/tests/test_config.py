from __future__ import annotations

from pathlib import Path

import pytest
import typer

from heislab import config


def test_parse_tolerances_accepts_known_names() -> None:
    assert config.parse_tolerances(["bochner=1e-6", " pharm = 2e-8"]) == {
        "bochner": 1e-6,
        "pharm": 2e-8,
    }
    assert config.parse_tolerances(None) == {}


@pytest.mark.parametrize("item", ["bochner", "unknown=1", "bochner=abc", "bochner=0", "=1"])
def test_parse_tolerances_rejects_invalid_items(item: str) -> None:
    with pytest.raises(typer.BadParameter):
        config.parse_tolerances([item])


def test_cli_values_override_file_values(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text(
        "\n".join(
            [
                "[run]",
                "seed = 5",
                'format = "json"',
                "",
                "[tolerances]",
                "bochner = 1e-4",
                "anchor = 1e-9",
                "",
                "[comparison]",
                "k2 = -1.0",
                "",
                "[comparison.grid]",
                "count = 12",
            ]
        )
    )
    run = config.load_run_config(
        "verify",
        "comparison",
        config_path=path,
        tolerances=["anchor=1e-11"],
        params={"k2": None, "l": 2.0},
    )
    assert run.seed == 5
    assert run.format == "json"
    assert run.tolerance("bochner") == 1e-4
    assert run.tolerance("anchor") == 1e-11
    assert run.tolerance("pharm") == config.DEFAULT_TOLERANCES["pharm"]
    assert run.params == {"k2": -1.0, "l": 2.0}
    assert run.grid == {"count": 12}
    assert "output_path" not in run.as_dict()

    overridden = config.load_run_config("verify", "comparison", config_path=path, seed=9)
    assert overridden.seed == 9


@pytest.mark.parametrize(
    "content",
    [
        "[run\nseed = 1",
        '[run]\nseed = "x"',
        '[run]\nformat = "xml"',
        "run = 3",
        "[bochner]\ngrid = 1",
    ],
)
def test_invalid_config_files(tmp_path: Path, content: str) -> None:
    path = tmp_path / "bad.toml"
    path.write_text(content)
    with pytest.raises(typer.BadParameter):
        config.load_run_config("verify", "bochner", config_path=path)


def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(typer.BadParameter, match="does not exist"):
        config.load_run_config("verify", "bochner", config_path=tmp_path / "nope.toml")


def test_report_path_honours_environment(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setenv(config.OUTPUT_DIR_ENV, str(tmp_path))
    run = config.load_run_config("verify", "cutoff")
    assert config.report_path(run, "cutoff") == tmp_path / "cutoff.csv"
    explicit = config.load_run_config("verify", "cutoff", out=tmp_path / "x.json", fmt="json")
    assert config.report_path(explicit, "cutoff") == tmp_path / "x.json"
    monkeypatch.delenv(config.OUTPUT_DIR_ENV)
    assert config.default_output_dir() == Path("artifacts") / "reports"


CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize(
    ("name", "suite"),
    [
        ("default.toml", "bochner"),
        ("default.toml", "geodesic-oracle"),
        ("comparison-negative.toml", "comparison"),
        ("gradient-estimate-quick.toml", "gradient-estimate"),
    ],
)
def test_shipped_configs_load(name: str, suite: str) -> None:
    run = config.load_run_config("verify", suite, config_path=CONFIG_DIR / name)
    assert run.seed == 0
    assert run.suite == suite
    if suite == "comparison":
        assert run.format == "json"
        assert run.params["k2"] == -1.0
        assert run.grid["kind"] == "shell"
    if suite == "gradient-estimate":
        assert run.params == {"b": "1", "radii": "1,2"}
        assert run.grid["count"] == 200
