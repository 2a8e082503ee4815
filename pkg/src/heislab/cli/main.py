"""Primary Typer CLI for the Heisenberg comparison laboratory."""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Annotated, Any, Optional

import pandas as pd
import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from heislab import __version__, ccdist, geodesy
from heislab.config import default_output_dir, load_run_config, report_path
from heislab.hgroup import Point, group_inv, group_mul
from heislab.report import FLOAT_FORMAT, VerificationReport
from heislab.suites import (
    SUITES,
    SuiteConfigError,
    run_suite,
    sweep_profile,
    sweep_ratio,
    sweep_riccati,
)
from heislab.telemetry import (
    DEFAULT_TELEMETRY_DIR,
    RunLog,
    default_log_path,
    latest_log,
    load_telemetry,
)

console = Console()
app = typer.Typer(help="Numerical checks of sub-Laplacian comparison and gradient estimates.")
sweep_app = typer.Typer(help="Plot-ready CSV sweeps of profiles, ratios and trajectories.")
app.add_typer(sweep_app, name="sweep")

SeedOption = Annotated[
    Optional[int], typer.Option("--seed", help="Seed for every sampled grid (64-bit unsigned).")
]
ConfigOption = Annotated[
    Optional[Path],
    typer.Option("--config", help="TOML run configuration ([run], [tolerances], [<suite>])."),
]
OutOption = Annotated[
    Optional[Path],
    typer.Option("--out", help="Output file (default: $HEISLAB_OUTPUT_DIR or artifacts/reports)."),
]
FormatOption = Annotated[
    Optional[str], typer.Option("--format", help="Report format: csv or json.")
]
TolOption = Annotated[
    Optional[list[str]],
    typer.Option("--tol", help="Tolerance override name=value (repeatable)."),
]


def _print_header() -> None:
    console.rule("Heisenberg comparison laboratory")


def _point(x1: float, x2: float, t: float, hint: str) -> Point:
    try:
        return Point(x1, x2, t)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint=hint) from exc


def _float_list(text: str, hint: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise typer.BadParameter(
            f"Expected comma-separated numbers, got '{text}'.", param_hint=hint
        ) from exc
    if not values:
        raise typer.BadParameter("At least one value is required.", param_hint=hint)
    return values


def _format_number(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.6g}"


def _render_report(report: VerificationReport) -> None:
    table = Table(title=f"{report.suite}: {report.summary['passed']} passed, "
                  f"{report.summary['failed']} failed")
    table.add_column("Entry", overflow="fold")
    table.add_column("Value", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Status")
    for entry in report.entries:
        status = "[green]pass[/]" if entry.passed else "[red]FAIL[/]"
        table.add_row(
            escape(entry.name), _format_number(entry.value), _format_number(entry.bound), status
        )
    console.print(table)
    for entry in report.entries:
        if not entry.passed and entry.note:
            console.print(f"[red]{escape(entry.name)}[/]: {escape(entry.note)}")


def _write_frame(frame: pd.DataFrame, out: Path | None, stem: str) -> Path:
    path = out or default_output_dir() / f"{stem}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


@app.command()
def version() -> None:
    """Display the current heislab version banner."""

    _print_header()
    console.print(f"heislab version: [bold]{__version__}[/]")


@app.command()
def dist(
    x1: Annotated[float, typer.Argument(help="Horizontal coordinate x1.")],
    x2: Annotated[float, typer.Argument(help="Horizontal coordinate x2.")],
    t: Annotated[float, typer.Argument(help="Vertical coordinate t.")],
    between: Annotated[
        Optional[tuple[float, float, float]],
        typer.Option("--between", help="Second point q; prints d(p, q) = r(q⁻¹ ∘ p)."),
    ] = None,
) -> None:
    """Print the Carnot–Carathéodory distance, its parameter φ and both closed forms.

    Notes
    -----
    Negative coordinates must follow ``--`` so they are not read as options,
    e.g. ``heislab dist -- -1 2 0``.
    """

    p = _point(x1, x2, t, "point")
    target = p
    if between is not None:
        q = _point(*between, "--between")
        target = group_mul(group_inv(q), p)
    try:
        evaluation = ccdist.evaluate_distance(target)
    except (ValueError, RuntimeError) as exc:
        console.print(f"[red]Distance evaluation failed:[/] {escape(str(exc))}")
        raise typer.Exit(code=1) from exc
    table = Table(show_header=False)
    table.add_row("point", str(target))
    table.add_row("r", repr(evaluation.r))
    table.add_row("phi", repr(evaluation.phi))
    table.add_row("r_nu", repr(evaluation.r_nu))
    table.add_row("gap", repr(evaluation.gap))
    console.print(table)


@app.command()
def verify(
    suite: Annotated[str, typer.Argument(help=f"Suite name: {', '.join(SUITES)}.")],
    seed: SeedOption = None,
    config: ConfigOption = None,
    out: OutOption = None,
    fmt: FormatOption = None,
    tol: TolOption = None,
    telemetry_log: Annotated[
        Optional[Path],
        typer.Option("--telemetry-log", help="Telemetry log path (JSONL)."),
    ] = None,
    k2: Annotated[Optional[float], typer.Option("--k2", help="Comparison: k₂.")] = None,
    ell: Annotated[Optional[float], typer.Option("--l", help="Comparison: l ≥ 0.")] = None,
    delta1: Annotated[Optional[float], typer.Option("--delta1", help="Comparison: δ₁.")] = None,
    delta2: Annotated[Optional[float], typer.Option("--delta2", help="Comparison: δ₂.")] = None,
    steps: Annotated[Optional[int], typer.Option("--steps", help="Riccati RK4 steps.")] = None,
    points: Annotated[
        Optional[int], typer.Option("--points", help="Bochner/commutation sample size.")
    ] = None,
    segments: Annotated[
        Optional[int], typer.Option("--N", help="Geodesic oracle: control segments.")
    ] = None,
    restarts: Annotated[
        Optional[int], typer.Option("--restarts", help="Geodesic oracle: seeded restarts.")
    ] = None,
    targets: Annotated[
        Optional[int], typer.Option("--targets", help="Geodesic oracle: sampled targets.")
    ] = None,
) -> None:
    """Run one verification suite and write its report.

    Exit codes: ``0`` when every entry passes, ``1`` when any entry fails and
    ``2`` for usage or configuration errors.
    """

    if suite not in SUITES:
        raise typer.BadParameter(
            f"Unknown suite '{suite}'; expected one of {', '.join(SUITES)}.", param_hint="suite"
        )
    params: dict[str, Any] = {
        "k2": k2,
        "l": ell,
        "delta1": delta1,
        "delta2": delta2,
        "steps": steps,
        "points": points,
        "N": segments,
        "restarts": restarts,
        "targets": targets,
    }
    log_path = telemetry_log or default_log_path(suite, base_dir=DEFAULT_TELEMETRY_DIR)
    run_log = RunLog(suite, log_path)
    try:
        run_config = load_run_config(
            "verify",
            suite,
            config_path=config,
            seed=seed,
            tolerances=tol,
            out=out,
            fmt=fmt,
            params=params,
        )
    except typer.BadParameter as exc:
        run_log.config_error(0.0, exc.format_message())
        raise
    _print_header()
    run_log.started(run_config.seed)
    start = time.perf_counter()
    try:
        report = run_suite(suite, run_config)
    except SuiteConfigError as exc:
        run_log.config_error(time.perf_counter() - start, str(exc))
        raise typer.BadParameter(str(exc), param_hint=f"[{suite}]") from exc
    runtime = time.perf_counter() - start
    path = report.write(report_path(run_config, suite), run_config.format)
    run_log.finished(report.ok, runtime, report.summary, path)
    _render_report(report)
    console.print(f"Report: {path}")
    console.print(f"Body digest: {report.body_digest(run_config.format)}")
    console.print(f"Telemetry log: {log_path}")
    if not report.ok:
        raise typer.Exit(code=1)


@app.command()
def geodesic(
    x1: Annotated[float, typer.Argument(help="Target x1.")],
    x2: Annotated[float, typer.Argument(help="Target x2.")],
    t: Annotated[float, typer.Argument(help="Target t.")],
    segments: Annotated[
        int, typer.Option("--N", help="Number of piecewise-constant control segments.")
    ] = geodesy.DEFAULT_SEGMENTS,
    restarts: Annotated[
        int, typer.Option("--restarts", help="Seeded restarts.")
    ] = geodesy.DEFAULT_RESTARTS,
    seed: Annotated[int, typer.Option("--seed", help="Restart seed.")] = 0,
    refine: Annotated[
        bool, typer.Option("--refine", help="Re-optimise once with doubled N.")
    ] = False,
) -> None:
    """Optimise a horizontal path to a target and compare its length with ``r``."""

    target = _point(x1, x2, t, "target")
    if segments < 8:
        raise typer.BadParameter("N must be at least 8.", param_hint="--N")
    if restarts < 1:
        raise typer.BadParameter("restarts must be positive.", param_hint="--restarts")
    try:
        result = geodesy.optimize_geodesic(target, segments, restarts, seed)
    except geodesy.GeodesicConvergenceError as exc:
        console.print(f"[red]{escape(str(exc))}[/]")
        raise typer.Exit(code=1) from exc
    if refine:
        result = geodesy.refine_geodesic(result, target)
    distance = ccdist.cc_distance(target)
    table = Table(show_header=False)
    table.add_row("target", str(target))
    table.add_row("segments", str(result.path.segments))
    table.add_row("length", repr(result.length))
    table.add_row("r", repr(distance))
    if distance > 0:
        table.add_row("relative error", f"{abs(result.length - distance) / distance:.3e}")
    table.add_row("endpoint error", f"{result.endpoint_error:.3e}")
    table.add_row("best restart", str(result.best_restart))
    console.print(table)


@sweep_app.command("F")
def sweep_f(
    phi_from: Annotated[float, typer.Option("--from", help="First φ (exclusive of 0).")] = 0.01,
    phi_to: Annotated[float, typer.Option("--to", help="Last φ (below π).")] = 3.13,
    n: Annotated[int, typer.Option("--n", help="Number of rows.")] = 1000,
    radius: Annotated[float, typer.Option("--radius", help="Radius of the matched points.")] = 1.0,
    out: OutOption = None,
) -> None:
    """Profiles of ``r Δ_b r`` against ``φ``.

    Columns: phi, F_closed, F_cartesian, r_dlap_numeric.
    """

    try:
        frame = sweep_profile(phi_from, phi_to, n, radius=radius)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--from/--to/--n") from exc
    path = _write_frame(frame, out, "sweep_F")
    console.print(f"Wrote {len(frame)} rows to {path}")


@sweep_app.command("ratio")
def sweep_ratio_cmd(
    field: Annotated[
        str, typer.Option("--field", help="Field spec, e.g. affine-positive:2.")
    ] = "affine-positive:2",
    b: Annotated[float, typer.Option("--b", help="Estimate parameter b > 0.")] = 1.0,
    radii: Annotated[str, typer.Option("--radii", help="Comma-separated radii.")] = "1,2,4,8",
    C2: Annotated[float, typer.Option("--C2", help="Constant C2 of the bound.")] = 1.0,
    seed: Annotated[int, typer.Option("--seed", help="Sample seed.")] = 0,
    out: OutOption = None,
) -> None:
    """Sup of the gradient ratio over ``B(R)`` for growing ``R``."""

    values = _float_list(radii, "--radii")
    try:
        frame = sweep_ratio(field, b, values, C2=C2, seed=seed)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--field/--b/--radii") from exc
    path = _write_frame(frame, out, "sweep_ratio")
    table = Table("R", "sup ratio", "bound", "positive")
    for row in frame.itertuples(index=False):
        table.add_row(f"{row.R:g}", _format_number(row.sup_ratio), _format_number(row.bound),
                      str(row.positive))
    console.print(table)
    console.print(f"Wrote {len(frame)} rows to {path}")


@sweep_app.command("riccati")
def sweep_riccati_cmd(
    k2: Annotated[float, typer.Option("--k2", help="Lower bound k₂.")] = 0.0,
    ell: Annotated[float, typer.Option("--l", help="Constant l ≥ 0.")] = 0.0,
    steps: Annotated[int, typer.Option("--steps", help="RK4 steps.")] = 10_000,
    out: OutOption = None,
) -> None:
    """Extremal Riccati trajectory with its bound family (columns r, y, bound)."""

    try:
        frame = sweep_riccati(k2, ell, steps=steps)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--k2/--l/--steps") from exc
    path = _write_frame(frame, out, "sweep_riccati")
    last = frame.iloc[-1]
    console.print(f"y({last['r']:.6g}) = {last['y']!r}; bound {last['bound']!r}")
    console.print(f"Wrote {len(frame)} rows to {path}")


@app.command("telemetry")
def telemetry_monitor(
    log_path: Annotated[
        Optional[Path],
        typer.Option("--log", help="Telemetry log path. Defaults to the newest run log."),
    ] = None,
    suite: Annotated[
        Optional[str], typer.Option("--suite", help="Only show records of this suite.")
    ] = None,
) -> None:
    """Print the most recent telemetry records for quick inspection."""

    path = log_path or latest_log(DEFAULT_TELEMETRY_DIR)
    records = load_telemetry(path, suite=suite) if path else []
    if not records:
        console.print("No telemetry entries found.", style="yellow")
        return
    console.print(f"Telemetry records ({len(records)}):")
    for rec in records[-10:]:
        runtime = "-" if rec.runtime_s is None else f"{rec.runtime_s:.2f}s"
        console.print(
            f"[{rec.status}] {rec.suite} {rec.timestamp} runtime={runtime} "
            f"{rec.details}",
            markup=False,
        )


def main() -> None:
    """Entrypoint invoked by the ``heislab`` console script."""

    app()


if __name__ == "__main__":
    main()
