"""Run configuration: TOML files, ``--tol`` overrides and the output directory."""

from __future__ import annotations

import os
import tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import typer

from heislab.report import REPORT_FORMATS

OUTPUT_DIR_ENV = "HEISLAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = Path("artifacts") / "reports"

DEFAULT_TOLERANCES: dict[str, float] = {
    "bochner": 1e-5,
    "anchor": 1e-10,
    "commutation-polynomial": 1e-10,
    "commutation-numeric": 1e-5,
    "log-identity": 1e-4,
    "pharm": 1e-8,
    "domination": 1e-8,
    "riccati-exact": 1e-8,
    "m1-residual": 1e-14,
    "derivatives": 1e-6,
    "refinement": 0.05,
    "dilation": 1e-4,
    "geodesic": 0.01,
    "geodesic-lower": 1e-3,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run.

    ``grid`` and ``params`` hold the suite table of the config file (CLI flags
    already merged in); ``output_path`` is ``None`` when the default location is used.
    """

    command: str
    suite: str | None = None
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    grid: dict[str, Any] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    output_path: str | None = None
    format: str = "csv"

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def as_dict(self) -> dict[str, Any]:
        """Plain dict echoed into report headers (the output location is not part of the body)."""

        payload = asdict(self)
        payload.pop("output_path")
        return payload


def default_output_dir() -> Path:
    """``$HEISLAB_OUTPUT_DIR`` or ``artifacts/reports``."""

    value = os.environ.get(OUTPUT_DIR_ENV)
    return Path(value) if value else DEFAULT_OUTPUT_DIR


def read_config_file(config_path: Path) -> dict[str, Any]:
    """Parse a TOML run configuration."""

    try:
        raw = config_path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise typer.BadParameter(
            f"Config file {config_path} does not exist.", param_hint="--config"
        ) from exc
    try:
        return tomllib.loads(raw)
    except tomllib.TOMLDecodeError as exc:
        raise typer.BadParameter(
            f"Failed to parse {config_path}: {exc}", param_hint="--config"
        ) from exc


def parse_tolerances(items: list[str] | None) -> dict[str, float]:
    """Parse repeated ``name=value`` overrides."""

    overrides: dict[str, float] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise typer.BadParameter(f"Expected name=value, got '{item}'.", param_hint="--tol")
        if name not in DEFAULT_TOLERANCES:
            known = ", ".join(sorted(DEFAULT_TOLERANCES))
            raise typer.BadParameter(
                f"Unknown tolerance '{name}' (known: {known}).", param_hint="--tol"
            )
        try:
            number = float(value)
        except ValueError as exc:
            raise typer.BadParameter(
                f"Tolerance '{name}' is not a number: '{value}'.", param_hint="--tol"
            ) from exc
        if not number > 0:
            raise typer.BadParameter(f"Tolerance '{name}' must be positive.", param_hint="--tol")
        overrides[name] = number
    return overrides


def _table(config: dict[str, Any], name: str) -> dict[str, Any]:
    table = config.get(name) or {}
    if not isinstance(table, dict):
        raise typer.BadParameter(f"[{name}] must be a table.", param_hint=f"[{name}]")
    return dict(table)


def load_run_config(
    command: str,
    suite: str | None = None,
    *,
    config_path: Path | None = None,
    seed: int | None = None,
    tolerances: list[str] | None = None,
    out: Path | None = None,
    fmt: str | None = None,
    params: dict[str, Any] | None = None,
) -> RunConfig:
    """Merge the config file (``[run]``, ``[tolerances]``, ``[<suite>]``) with CLI flags.

    CLI values win over file values; ``None`` means "not given on the command line".

    Raises
    ------
    typer.BadParameter
        On unreadable files, malformed tables or invalid values.
    """

    config = read_config_file(config_path) if config_path else {}
    run_cfg = _table(config, "run")
    file_tols = _table(config, "tolerances")
    suite_cfg = _table(config, suite) if suite else {}

    merged_tols = dict(DEFAULT_TOLERANCES)
    merged_tols.update(parse_tolerances([f"{k}={v}" for k, v in file_tols.items()]))
    merged_tols.update(parse_tolerances(tolerances))

    resolved_seed = seed if seed is not None else run_cfg.get("seed", 0)
    if not isinstance(resolved_seed, int) or not 0 <= resolved_seed < 2**64:
        raise typer.BadParameter("seed must be a 64-bit unsigned integer.", param_hint="--seed")
    resolved_fmt = fmt or run_cfg.get("format", "csv")
    if resolved_fmt not in REPORT_FORMATS:
        raise typer.BadParameter(
            f"format must be one of {REPORT_FORMATS}, got '{resolved_fmt}'.",
            param_hint="--format",
        )
    output = out or run_cfg.get("output")

    grid = suite_cfg.pop("grid", {})
    if not isinstance(grid, dict):
        raise typer.BadParameter("grid must be a table.", param_hint=f"[{suite}.grid]")
    merged_params = suite_cfg
    merged_params.update({k: v for k, v in (params or {}).items() if v is not None})
    return RunConfig(
        command=command,
        suite=suite,
        seed=resolved_seed,
        tolerances=merged_tols,
        grid=dict(grid),
        params=merged_params,
        output_path=str(output) if output else None,
        format=resolved_fmt,
    )


def report_path(config: RunConfig, stem: str) -> Path:
    """Where a report for ``config`` is written."""

    if config.output_path:
        return Path(config.output_path)
    return default_output_dir() / f"{stem}.{config.format}"
