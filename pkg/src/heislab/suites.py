"""Verification suites and sweeps driven by the CLI.

Each suite maps a :class:`~heislab.config.RunConfig` to a
:class:`~heislab.report.VerificationReport`.  Configuration problems raise
:class:`SuiteConfigError` before any entry is evaluated; numeric errors raised
while evaluating an entry mark that entry as failed and the suite carries on.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import replace
from typing import Any

import numpy as np
import pandas as pd

from heislab import ccdist, comparison, estimates, geodesy
from heislab.bochner import bochner_terms, commute_T_residual, log_identity_residual, pharm_check
from heislab.config import RunConfig
from heislab.hgroup import Point, ScalarField, apply_frame, bracket_residual
from heislab.pharm import (
    CATALOG_VERSION,
    DEFAULT_GAUGE_GRID,
    FieldSpec,
    calibrated_gauge,
    catalog,
    dilation_residual_ratio,
    make_field,
    parse_field_spec,
)
from heislab.report import VerificationReport
from heislab.sampling import GridSpec, grid_points, random_points, shell_point
from heislab.sublap import (
    SingularRegionError,
    sublap,
    sublap_r_cartesian,
    sublap_r_closed,
    sublap_r_numeric,
)

NUMERIC_ERRORS = (ArithmeticError, ValueError, RuntimeError)
ANCHOR_POINT = Point(0.3, -0.7, 0.2)
CALIBRATION_MARGIN = 1e-6
DILATION_FACTOR = 2.0


class SuiteConfigError(ValueError):
    """Invalid suite parameters or grid overrides."""


def _new_report(suite: str, config: RunConfig) -> VerificationReport:
    return VerificationReport(
        suite=suite, config_echo=config.as_dict(), catalog_version=CATALOG_VERSION
    )


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _param(config: RunConfig, name: str, default: Any, cast: Callable[[Any], Any] = float) -> Any:
    value = config.params.get(name, default)
    try:
        if isinstance(default, tuple):
            items = value.split(",") if isinstance(value, str) else value
            return tuple(cast(item) for item in items)
        return cast(value)
    except (TypeError, ValueError) as exc:
        raise SuiteConfigError(f"Invalid value for '{name}': {value!r}") from exc


def _flag(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise ValueError(f"expected true or false, got {value!r}")


def _grid(config: RunConfig, default: GridSpec) -> GridSpec:
    try:
        return replace(default, **config.grid)
    except (TypeError, ValueError) as exc:
        raise SuiteConfigError(f"Invalid grid override {config.grid}: {exc}") from exc


def _catalog_fields() -> list[tuple[ScalarField, bool]]:
    return [(make_field(entry.spec), entry.pseudoharmonic) for entry in catalog()]


# --- bochner ------------------------------------------------------------------------------------


def _anchors(report: VerificationReport, tolerance: float) -> None:
    p = ANCHOR_POINT
    for expression, expected in (("x1**2", 1.0), ("t", 0.0), ("x1**2 + x2**2", 2.0)):
        field = make_field(FieldSpec(kind="polynomial", expression=expression))
        report.add(f"anchor Δ_b({expression})", abs(sublap(field, p) - expected), tolerance,
                   note=f"expected {expected:g}")
    terms = bochner_terms(make_field(FieldSpec(kind="coordinate-t")), p)
    report.add("anchor bochner lhs [t]", abs(terms.lhs - 4.0), tolerance, note="expected 4")
    report.add("anchor bochner rhs [t]", abs(terms.lhs - terms.residual - 4.0), tolerance,
               note="expected 4")


def run_bochner(config: RunConfig) -> VerificationReport:
    """Bochner identity and inequality over the catalog, plus exact anchors."""

    count = _param(config, "points", 100, int)
    bound = _param(config, "bound", 2.0)
    nus = _param(config, "nu", (0.5, 1.0, 2.0))
    if count < 1 or bound <= 0:
        raise SuiteConfigError("points and bound must be positive")
    tol = config.tolerance("bochner")
    points = random_points(count, config.seed, bound)
    report = _new_report("bochner", config)
    _anchors(report, config.tolerance("anchor"))

    for field, pseudoharmonic in _catalog_fields():
        name = f"bochner residual [{field.label}]"
        try:
            worst = 0.0
            worst_gap = 0.0
            for p in points:
                terms = bochner_terms(field, p)
                worst = max(worst, abs(terms.residual) / terms.scale)
                for nu in nus:
                    worst_gap = max(worst_gap, -terms.inequality_gap(nu) / terms.scale)
        except NUMERIC_ERRORS as exc:
            report.fail(name, _describe(exc))
            continue
        report.add(name, worst, tol, note=f"{count} points, relative to largest term")
        report.add(f"bochner inequality [{field.label}]", worst_gap, tol,
                   note=f"nu in {list(nus)}")
        if pseudoharmonic and all(field(p) > 0 for p in points):
            log_name = f"log identity [{field.label}]"
            try:
                residual = max(abs(log_identity_residual(field, p).residual) for p in points)
            except NUMERIC_ERRORS as exc:
                report.fail(log_name, _describe(exc))
                continue
            report.add(log_name, residual, config.tolerance("log-identity"))
    return report


# --- commutation --------------------------------------------------------------------------------


def _bundle_scale(field: ScalarField, p: Point) -> float:
    bundle = apply_frame(field, p)
    return max(
        1.0,
        *(abs(v) for v in (bundle.f0, bundle.fe1e1, bundle.fe1e2, bundle.fe2e1, bundle.fe2e2)),
    )


def run_commutation(config: RunConfig) -> VerificationReport:
    """``[X1, X2] = −2T`` and ``[Δ_b, T] = 0`` on the catalog and a finite-difference field."""

    count = _param(config, "points", 50, int)
    bound = _param(config, "bound", 2.0)
    points = random_points(count, config.seed, bound)
    report = _new_report("commutation", config)
    fields = [field for field, _ in _catalog_fields()]
    polynomial = make_field(FieldSpec(kind="polynomial", expression="x1*x2 + t"))
    fields.append(
        ScalarField.numeric(
            lambda x1, x2, t: float(polynomial.evaluate(x1, x2, t)), label="numeric(x1*x2 + t)"
        )
    )
    for field in fields:
        tol = (
            config.tolerance("commutation-polynomial")
            if field.provenance == "polynomial"
            else config.tolerance("commutation-numeric")
        )
        name = f"bracket [{field.label}]"
        try:
            worst = max(abs(bracket_residual(field, p)) / _bundle_scale(field, p) for p in points)
        except NUMERIC_ERRORS as exc:
            report.fail(name, _describe(exc))
            continue
        report.add(name, worst, tol, note="fe2e1 − fe1e2 + 2 f0, relative")
        if not field.has_partials:
            # Δ_b T f would need finite differences of finite differences.
            continue
        name = f"[Δ_b, T] [{field.label}]"
        try:
            worst = max(abs(commute_T_residual(field, p)) / _bundle_scale(field, p) for p in points)
        except NUMERIC_ERRORS as exc:
            report.fail(name, _describe(exc))
            continue
        report.add(name, worst, tol, note="relative")
    return report


# --- comparison ---------------------------------------------------------------------------------

COMPARISON_LATTICE = tuple((ell, k2) for ell in (0.0, 1.0, 4.0) for k2 in (-1.0, 0.0, 1.0))


def _riccati_anchors(report: VerificationReport, config: RunConfig) -> None:
    for ell, expected in ((0.0, 0.5), (1.0, 1.0)):
        m = comparison.m1_of_l(ell)
        report.add(f"m1({ell:g})", abs(m - expected), config.tolerance("m1-residual"),
                   note=f"value {m!r}")
    worst = 0.0
    for ell in np.linspace(0.0, 10.0, 21):
        m = comparison.m1_of_l(float(ell))
        worst = max(worst, abs(2.0 * m * m - m - float(ell)))
    report.add("m1 defining residual", worst, config.tolerance("m1-residual"))

    flat = comparison.ComparisonParams()
    trajectory = comparison.riccati_integrate(flat, 5.0, 0.1, 10.0)
    exact = 0.5 / trajectory.radii
    error = float(np.max(np.abs(trajectory.values - exact) / exact))
    report.add("riccati flat exact m/r", error, config.tolerance("riccati-exact"),
               note="m = 1/2 on [0.1, 10], 10^4 steps")
    negative = comparison.ComparisonParams(k2=-1.0)
    trajectory = comparison.riccati_integrate(negative, 5.0, 0.1, 20.0)
    report.add("riccati fixed point k2=-1", abs(trajectory.final - math.sqrt(0.5)), 1e-8,
               note="limit sqrt(1/2)")


def _measured_constant(report: VerificationReport, config: RunConfig) -> None:
    grid = _grid(config, comparison.DEFAULT_CONSTANT_GRID)
    try:
        measured = comparison.measure_comparison_constant(grid)
        dilated = comparison.measure_comparison_constant(
            [Point(DILATION_FACTOR * p.x1, DILATION_FACTOR * p.x2,
                   DILATION_FACTOR**2 * p.t) for p in grid_points(grid)]
        )
        refined = comparison.measure_comparison_constant(replace(grid, count=4 * grid.count))
    except NUMERIC_ERRORS as exc:
        report.fail("sup r·Δ_b r", _describe(exc))
        return
    report.add(
        "sup r·Δ_b r",
        measured.sup,
        math.inf,
        passed=math.isfinite(measured.sup),
        note=(
            f"argmax φ = {measured.argmax_phi:.6g}; Cartesian profile sup "
            f"{measured.closed_form_sup:.6g}; displayed profile sup "
            f"{measured.profile_sup:.6g}; claimed 3"
        ),
    )
    report.add("dilation change sup r·Δ_b r", abs(dilated.sup - measured.sup) / abs(measured.sup),
               config.tolerance("dilation"), note=f"lambda = {DILATION_FACTOR:g}")
    report.add("refinement change sup r·Δ_b r",
               abs(refined.sup - measured.sup) / abs(measured.sup),
               config.tolerance("refinement"), note=f"{refined.count} refined points")
    measured_l = comparison.measure_l(grid)
    report.add("measured l", measured_l, math.inf, passed=math.isfinite(measured_l),
               note="sup r²(2 e1 r0 − 2 r0²)")


def _radial_identity(report: VerificationReport) -> None:
    try:
        rows = comparison.radial_identity_diagnostic()
    except NUMERIC_ERRORS as exc:
        report.fail("radial identity", _describe(exc))
        return
    for radius in sorted({round(row.point.s, 12) for row in rows}):
        subset = [row for row in rows if round(row.point.s, 12) == radius]
        worst = max(subset, key=lambda row: abs(row.residual))
        report.add(
            f"radial identity s={radius:g}",
            worst.residual,
            math.nan,
            passed=True,
            note=(
                f"diagnostic; Cartesian profile {worst.cartesian_residual:.6g}, "
                f"displayed profile {worst.profile_residual:.6g}"
            ),
        )


def run_comparison(config: RunConfig) -> VerificationReport:
    """Riccati anchors, family domination and the measured comparison constant."""

    report = _new_report("comparison", config)
    delta1 = _param(config, "delta1", 0.5)
    delta2 = _param(config, "delta2", 0.5)
    steps = _param(config, "steps", comparison.DEFAULT_STEPS, int)
    if "k2" in config.params or "l" in config.params:
        lattice: Sequence[tuple[float, float]] = (
            (_param(config, "l", 0.0), _param(config, "k2", 0.0)),
        )
    else:
        lattice = COMPARISON_LATTICE
    try:
        parameter_sets = [
            comparison.ComparisonParams(k2=k2, l=ell, delta1=delta1, delta2=delta2)
            for ell, k2 in lattice
        ]
    except ValueError as exc:
        raise SuiteConfigError(str(exc)) from exc

    _riccati_anchors(report, config)
    for params in parameter_sets:
        family = comparison.theorem_family(params)
        try:
            result = comparison.verify_comparison(
                params, family, steps=steps, tolerance=config.tolerance("domination")
            )
        except NUMERIC_ERRORS as exc:
            report.fail(f"domination [k2={params.k2:g} l={params.l:g}]", _describe(exc))
            continue
        report.extend(result)
    if _param(config, "measure", True, _flag):
        _measured_constant(report, config)
        _radial_identity(report)
    return report


# --- l31 ----------------------------------------------------------------------------------------


def run_l31(config: RunConfig) -> VerificationReport:
    grid = _grid(config, comparison.DEFAULT_L31_GRID)
    result = comparison.verify_l31_bounds(
        grid,
        derivative_tolerance=config.tolerance("derivatives"),
        refinement_tolerance=config.tolerance("refinement"),
    )
    report = _new_report("l31", config)
    report.extend(result)
    return report


# --- gradient estimate --------------------------------------------------------------------------


def _positive_on_ball(field: ScalarField, points: Sequence[Point], R: float) -> str | None:
    probes = [Point(0.0, 0.0, 0.0), *estimates.sphere_probes(2.0 * R), *points]
    for p in probes:
        try:
            value = field(p)
        except NUMERIC_ERRORS:
            return f"singular at {p}"
        if value <= 0:
            return f"not positive at {p}"
    return None


def run_gradient_estimate(config: RunConfig) -> VerificationReport:
    """Estimate bound with one calibrated ``C2`` reused across the catalog.

    Fields that are not positive on ``B(2R)`` are skipped with a note; controls
    must be rejected by the pseudoharmonicity precondition.
    """

    bs = _param(config, "b", (0.5, 1.0, 4.0))
    radii = _param(config, "radii", (1.0, 2.0, 4.0))
    grid = _grid(config, replace(estimates.DEFAULT_ESTIMATE_GRID, seed=config.seed))
    report = _new_report("gradient-estimate", config)

    fields = [(make_field(FieldSpec(kind="constant", c=1.0)), True), *_catalog_fields()]
    admissible: dict[str, tuple[ScalarField, list[float]]] = {}
    for field, pseudoharmonic in fields:
        if not pseudoharmonic:
            name = f"control rejected [{field.label}]"
            try:
                estimates.verify_gradient_estimate(
                    field, estimates.EstimateParams(R=radii[0]), grid
                )
            except estimates.PreconditionError as exc:
                report.add(name, 1.0, 1.0, passed=True, note=str(exc))
            except NUMERIC_ERRORS as exc:
                report.fail(name, _describe(exc))
            else:
                report.add(name, 0.0, 1.0, passed=False, note="precondition passed")
            continue
        usable: list[float] = []
        for R in radii:
            reason = _positive_on_ball(field, grid_points(estimates.ball_grid(R, grid)), R)
            if reason is None:
                usable.append(R)
            else:
                report.add(f"skipped [{field.label}] R={R:g}", math.nan, math.nan, passed=True,
                           note=reason)
        if usable:
            admissible[field.label] = (field, usable)

    C2 = 0.0
    for field, usable in admissible.values():
        for b in bs:
            try:
                C2 = max(C2, estimates.calibrate_C2(field, b, usable, grid))
            except NUMERIC_ERRORS as exc:
                report.fail(f"calibrate C2 [{field.label}] b={b:g}", _describe(exc))
    report.add("calibrated C2", C2, math.inf, passed=math.isfinite(C2),
               note="maximum over admissible fields and b")
    C2_used = C2 * (1.0 + CALIBRATION_MARGIN) + CALIBRATION_MARGIN

    for field, usable in admissible.values():
        for b in bs:
            for R in usable:
                name = f"estimate [{field.label}] b={b:g} R={R:g}"
                params = estimates.EstimateParams(b=b, C2=C2_used, R=R)
                try:
                    result = estimates.verify_gradient_estimate(field, params, grid)
                except NUMERIC_ERRORS as exc:
                    report.fail(name, _describe(exc))
                    continue
                report.add(
                    name,
                    result.sup_ratio,
                    result.bound,
                    passed=result.passed,
                    note=f"{result.grid_size} points in B(R); weak bound {result.weak:.6g}",
                )
    return report


# --- geodesic oracle ----------------------------------------------------------------------------


def run_geodesic_oracle(config: RunConfig) -> VerificationReport:
    """Trajectory-optimised lengths against the closed-form distance."""

    targets = _param(config, "targets", 20, int)
    segments = _param(config, "N", geodesy.DEFAULT_SEGMENTS, int)
    restarts = _param(config, "restarts", geodesy.DEFAULT_RESTARTS, int)
    r_min = _param(config, "r_min", 0.5)
    r_max = _param(config, "r_max", 3.0)
    try:
        spec = GridSpec(kind="ball", r_min=r_min, r_max=r_max, count=targets, seed=config.seed)
    except ValueError as exc:
        raise SuiteConfigError(str(exc)) from exc
    report = _new_report("geodesic-oracle", config)
    relative = config.tolerance("geodesic")
    lower = config.tolerance("geodesic-lower")
    points = [Point(0.0, 0.0, 1.0), *grid_points(spec)]
    for index, target in enumerate(points):
        name = f"geodesic {index:02d} {target}"
        try:
            distance = ccdist.cc_distance(target)
            result = geodesy.optimize_geodesic(target, segments, restarts, config.seed)
        except NUMERIC_ERRORS as exc:
            report.fail(name, _describe(exc))
            continue
        error = abs(result.length - distance) / distance
        report.add(
            name,
            error,
            relative,
            note=(
                f"length {result.length:.10g} vs r {distance:.10g}; "
                f"restart {result.best_restart}; endpoint error {result.endpoint_error:.2e}"
            ),
        )
        report.add(f"lower bound {index:02d}", distance - result.length, lower,
                   note="r − length")
    return report


# --- cutoff / pharm -----------------------------------------------------------------------------


def run_cutoff(config: RunConfig) -> VerificationReport:
    radii = _param(config, "radii", (1.0, 10.0, 100.0))
    samples = _param(config, "samples", estimates.CERTIFICATE_SAMPLES, int)
    report = _new_report("cutoff", config)
    for R in radii:
        try:
            cutoff = estimates.build_cutoff(R)
        except ValueError as exc:
            raise SuiteConfigError(str(exc)) from exc
        cert = cutoff.certify(samples)
        report.add(f"|η′| R / η^½ R={R:g}", cert.first_ratio, cert.certified_C)
        report.add(f"|η″| R² R={R:g}", cert.second_ratio, cert.certified_C)
        report.add(f"monotone R={R:g}", float(cert.monotone), 1.0, passed=cert.monotone)
        anchor = config.tolerance("anchor")
        report.add(f"η(R) R={R:g}", abs(cutoff(R) - 1.0), anchor)
        report.add(f"η(2R) R={R:g}", abs(cutoff(2.0 * R)), anchor)
        report.add(f"η(1.5R) R={R:g}", abs(cutoff(1.5 * R) - 0.5), anchor)
    return report


def run_pharm(config: RunConfig) -> VerificationReport:
    """Gauge calibration, catalog pseudoharmonicity and dilation homogeneity."""

    grid = _grid(config, DEFAULT_GAUGE_GRID)
    tol = config.tolerance("pharm")
    report = _new_report("pharm", config)
    gauge = calibrated_gauge()
    curve = "; ".join(f"{a:.4f}:{r:.3e}" for a, r in gauge.curve)
    report.add("gauge exponent residual", gauge.residual, tol, passed=gauge.admitted,
               note=f"alpha = {gauge.alpha:.15g}; curve {curve}")
    points = grid_points(grid)
    for entry in catalog():
        field = make_field(entry.spec)
        try:
            check = pharm_check(field, points, tolerance=tol)
        except NUMERIC_ERRORS as exc:
            report.fail(f"pharm [{field.label}]", _describe(exc))
            continue
        if entry.pseudoharmonic:
            report.extend(check)
        else:
            value = check.entries[0].value
            report.add(f"control fails pharm [{field.label}]", value, tol,
                       passed=value > tol, note="expected to exceed the tolerance")
    alpha = 0.3
    expected = DILATION_FACTOR ** (-4.0 * alpha - 2.0)
    worst = max(
        abs(dilation_residual_ratio(alpha, p, DILATION_FACTOR) / expected - 1.0)
        for p in points[:20]
    )
    report.add("dilation homogeneity alpha=0.3", worst, 1e-10, note="λ^(−4α−2)")
    return report


SUITES: dict[str, Callable[[RunConfig], VerificationReport]] = {
    "bochner": run_bochner,
    "commutation": run_commutation,
    "comparison": run_comparison,
    "l31": run_l31,
    "gradient-estimate": run_gradient_estimate,
    "geodesic-oracle": run_geodesic_oracle,
    "cutoff": run_cutoff,
    "pharm": run_pharm,
}


def run_suite(name: str, config: RunConfig) -> VerificationReport:
    try:
        runner = SUITES[name]
    except KeyError as exc:
        raise SuiteConfigError(
            f"Unknown suite '{name}'; expected one of {', '.join(SUITES)}"
        ) from exc
    return runner(config)


# --- sweeps -------------------------------------------------------------------------------------

SWEEP_KINDS = ("F", "ratio", "riccati")


def sweep_profile(phi_from: float, phi_to: float, n: int, *, radius: float = 1.0) -> pd.DataFrame:
    """Profiles of ``r Δ_b r`` in ``φ`` and the finite-difference value at the matched point.

    The matched point lies on the CC sphere of radius ``radius`` at angle zero; it is
    ``NaN`` where that point falls inside the excluded axis neighbourhood.
    """

    if not 0.0 < phi_from < phi_to < math.pi or n < 2:
        raise ValueError("Need 0 < from < to < π and n ≥ 2")
    rows = []
    for phi in np.linspace(phi_from, phi_to, n):
        phi = float(phi)
        p = shell_point(radius, phi, 0.0)
        try:
            numeric = radius * sublap_r_numeric(p)
        except SingularRegionError:
            numeric = math.nan
        rows.append(
            {
                "phi": phi,
                "F_closed": sublap_r_closed(phi),
                "F_cartesian": sublap_r_cartesian(phi),
                "r_dlap_numeric": numeric,
            }
        )
    return pd.DataFrame(rows)


def sweep_ratio(
    field_spec: str,
    b: float,
    radii: Sequence[float],
    *,
    C2: float = 1.0,
    seed: int = 0,
) -> pd.DataFrame:
    """Sup gradient ratio against ``R`` (positivity failures reported as ``NaN``)."""

    field = make_field(parse_field_spec(field_spec))
    grid = replace(estimates.DEFAULT_ESTIMATE_GRID, seed=seed)
    probe = estimates.liouville_probe(field, radii, b, grid, C2=C2)
    rows = [
        {
            "R": R,
            "sup_ratio": entry.value,
            "bound": entry.bound,
            "positive": math.isfinite(entry.value),
            "note": entry.note,
        }
        for R, entry in zip(radii, probe.entries, strict=False)
    ]
    return pd.DataFrame(rows)


def sweep_riccati(
    k2: float, l: float, *, steps: int = comparison.DEFAULT_STEPS  # noqa: E741
) -> pd.DataFrame:
    """Extremal Riccati trajectory with the matching bound family on its validity range."""

    params = comparison.ComparisonParams(k2=k2, l=l)
    family = comparison.theorem_family(params)
    lo, hi = comparison.validity_range(params, family)
    trajectory = comparison.riccati_integrate(params, float(family.bound(lo)), lo, hi, steps)
    return pd.DataFrame(
        {
            "r": trajectory.radii,
            "y": trajectory.values,
            "bound": family.bound(trajectory.radii),
        }
    )
