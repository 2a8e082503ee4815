"""Catalog of test fields: pseudoharmonic fields, polynomial calibration fields, bump controls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cache

import numpy as np
import sympy
from scipy import optimize

from heislab.hgroup import X1, X2, Point, ScalarField, T, group_mul, translate_expr
from heislab.sampling import GridSpec, grid_points
from heislab.sublap import sublap_expr

CATALOG_VERSION = "heislab-catalog-2"
GAUGE_RESIDUAL_FLOOR = 1e-8
DEFAULT_GAUGE_SEARCH = (0.1, 1.5)
DEFAULT_GAUGE_GRID = GridSpec(kind="ball", r_min=0.5, r_max=5.0, count=200, seed=11, min_s=0.0)

FIELD_KINDS = (
    "constant",
    "coordinate-x1",
    "coordinate-x2",
    "coordinate-t",
    "affine-positive",
    "exponential-x1",
    "gauge-power",
    "translated",
    "polynomial",
    "bump-modulated",
)

ALPHA = sympy.Symbol("alpha", positive=True)


class FieldSpecError(ValueError):
    """Invalid field specification."""


@dataclass(frozen=True)
class FieldSpec:
    """Declarative description of a catalog field.

    ``c`` parametrises ``constant`` and ``affine-positive`` (``c + x1``), ``alpha``
    the gauge power ``(s⁴ + t²)^(−α)``, ``expression`` a polynomial in ``x1, x2, t``.
    ``translated`` composes ``base`` with left translation by ``offset``;
    ``bump-modulated`` multiplies ``base`` by ``exp(−|q − offset|² / width²)``.
    """

    kind: str
    c: float | None = None
    alpha: float | None = None
    expression: str | None = None
    base: FieldSpec | None = None
    offset: Point | None = None
    width: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIELD_KINDS:
            raise FieldSpecError(f"Unknown field kind '{self.kind}'")
        if self.kind == "affine-positive" and not (self.c is not None and self.c > 0):
            raise FieldSpecError("affine-positive requires c > 0")
        if self.kind == "constant" and not (self.c is not None and self.c > 0):
            raise FieldSpecError("constant fields must be positive")
        if self.kind == "gauge-power" and not (self.alpha is not None and self.alpha > 0):
            raise FieldSpecError("gauge-power requires alpha > 0")
        if self.kind == "polynomial" and not self.expression:
            raise FieldSpecError("polynomial requires an expression")
        if self.kind in ("translated", "bump-modulated"):
            if self.base is None or self.offset is None:
                raise FieldSpecError(f"{self.kind} requires base and offset")
        if self.kind == "bump-modulated" and not (self.width is not None and self.width > 0):
            raise FieldSpecError("bump-modulated requires width > 0")

    @property
    def label(self) -> str:
        match self.kind:
            case "constant" | "affine-positive":
                return f"{self.kind}:{self.c:g}"
            case "gauge-power":
                return f"gauge-power:{self.alpha:.12g}"
            case "polynomial":
                return f"polynomial:{self.expression}"
            case "translated":
                return f"translated({self.base.label}, {self.offset})"
            case "bump-modulated":
                return f"bump({self.base.label}, {self.offset}, {self.width:g})"
            case _:
                return self.kind


@dataclass(frozen=True)
class CatalogEntry:
    spec: FieldSpec
    pseudoharmonic: bool


def _parse_expression(text: str) -> sympy.Expr:
    try:
        expr = sympy.sympify(text, locals={"x1": X1, "x2": X2, "t": T})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise FieldSpecError(f"Cannot parse expression '{text}': {exc}") from exc
    if expr.free_symbols - {X1, X2, T}:
        raise FieldSpecError(f"Expression '{text}' may only use x1, x2, t")
    return expr


def field_expr(spec: FieldSpec) -> sympy.Expr:
    """Sympy expression of the field described by ``spec``."""

    match spec.kind:
        case "constant":
            return sympy.Float(spec.c)
        case "coordinate-x1":
            return X1
        case "coordinate-x2":
            return X2
        case "coordinate-t":
            return T
        case "affine-positive":
            return sympy.Float(spec.c) + X1
        case "exponential-x1":
            return sympy.exp(X1)
        case "gauge-power":
            return gauge_expr(sympy.Float(spec.alpha))
        case "polynomial":
            return _parse_expression(spec.expression)
        case "translated":
            return translate_expr(field_expr(spec.base), spec.offset)
        case "bump-modulated":
            a1, a2, at = spec.offset.as_tuple()
            dist2 = (X1 - a1) ** 2 + (X2 - a2) ** 2 + (T - at) ** 2
            return field_expr(spec.base) * sympy.exp(-dist2 / sympy.Float(spec.width) ** 2)
    raise FieldSpecError(f"Unknown field kind '{spec.kind}'")


def gauge_expr(alpha: sympy.Expr) -> sympy.Expr:
    return ((X1**2 + X2**2) ** 2 + T**2) ** (-alpha)


def make_field(spec: FieldSpec) -> ScalarField:
    """Build a :class:`ScalarField` with analytic partials from ``spec``."""

    polynomial = spec.kind in (
        "constant",
        "coordinate-x1",
        "coordinate-x2",
        "coordinate-t",
        "affine-positive",
        "polynomial",
    ) or (spec.kind == "translated" and spec.base.kind == "polynomial")
    return ScalarField.from_expr(
        field_expr(spec),
        label=spec.label,
        provenance="polynomial" if polynomial else "closed-form",
    )


def translate_field(u: ScalarField, p: Point) -> ScalarField:
    """``q ↦ u(p ∘ q)``; analytic when ``u`` is."""

    if u.expr is not None:
        return u.derived(translate_expr(u.expr, p), label=f"translated({u.label}, {p})")

    return ScalarField.numeric(
        lambda a, b, c: u(group_mul(p, Point(a, b, c))), label=f"translated({u.label}, {p})"
    )


def parse_field_spec(text: str) -> FieldSpec:
    """Parse the CLI/config grammar ``kind[:parameter]``.

    Examples: ``coordinate-x1``, ``affine-positive:2``, ``gauge-power:0.5``,
    ``constant:3``, ``polynomial:x1*x2``.
    """

    kind, _, argument = text.strip().partition(":")
    kind = kind.strip()
    argument = argument.strip()
    try:
        match kind:
            case "constant" | "affine-positive":
                return FieldSpec(kind=kind, c=float(argument))
            case "gauge-power":
                return FieldSpec(kind=kind, alpha=float(argument) if argument else 0.5)
            case "polynomial":
                return FieldSpec(kind=kind, expression=argument)
            case "coordinate-x1" | "coordinate-x2" | "coordinate-t" | "exponential-x1":
                return FieldSpec(kind=kind)
    except ValueError as exc:
        raise FieldSpecError(f"Invalid parameter in field spec '{text}': {exc}") from exc
    raise FieldSpecError(f"Unsupported field spec '{text}'")


# --- gauge calibration -----------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeCalibration:
    """Outcome of the gauge-exponent search."""

    alpha: float
    residual: float
    """``sup |Δ_b u_α| / sup |u_α|`` at the optimum."""
    admitted: bool
    curve: list[tuple[float, float]] = field(default_factory=list)
    """Residual curve sampled over the search interval."""


@cache
def _gauge_laplacian_function():
    expr = gauge_expr(ALPHA)
    lap = sublap_expr(expr)
    variables = (X1, X2, T, ALPHA)
    return (
        sympy.lambdify(variables, expr, modules="numpy"),
        sympy.lambdify(variables, lap, modules="numpy"),
    )


def gauge_residual(alpha: float, points: list[Point]) -> float:
    """Normalised residual ``sup |Δ_b u_α| / sup |u_α|`` over ``points``."""

    values_fn, lap_fn = _gauge_laplacian_function()
    coords = np.array([p.as_tuple() for p in points], dtype=float)
    x1, x2, t = coords.T
    values = np.abs(np.asarray(values_fn(x1, x2, t, alpha), dtype=float))
    laplacian = np.abs(np.asarray(lap_fn(x1, x2, t, alpha), dtype=float))
    return float(laplacian.max() / values.max())


def calibrate_gauge_exponent(
    search: tuple[float, float] = DEFAULT_GAUGE_SEARCH,
    grid: GridSpec = DEFAULT_GAUGE_GRID,
    *,
    curve_points: int = 29,
) -> GaugeCalibration:
    """Find ``α`` minimising ``sup |Δ_b (s⁴ + t²)^(−α)|`` over ``grid``.

    Uses bounded golden-section/Brent search on ``search``.  The family is admitted
    as pseudoharmonic only when the minimum reaches ``1e-8 · sup |u|``.

    Raises
    ------
    ValueError
        If the grid contains the origin.
    """

    lo, hi = search
    if not 0 < lo < hi:
        raise ValueError("Search interval must satisfy 0 < lo < hi")
    points = grid_points(grid)
    if any(p.s == 0.0 and p.t == 0.0 for p in points):
        raise ValueError("Gauge calibration grid must exclude the origin")
    result = optimize.minimize_scalar(
        lambda a: gauge_residual(a, points),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13, "maxiter": 500},
    )
    alpha = float(result.x)
    residual = gauge_residual(alpha, points)
    samples = np.linspace(lo, hi, curve_points)
    curve = [(float(a), gauge_residual(float(a), points)) for a in samples]
    return GaugeCalibration(
        alpha=alpha, residual=residual, admitted=residual <= GAUGE_RESIDUAL_FLOOR, curve=curve
    )


@cache
def calibrated_gauge() -> GaugeCalibration:
    return calibrate_gauge_exponent()


# --- catalog ------------------------------------------------------------------------------------

TRANSLATION_OFFSETS = (Point(10.0, 0.0, 0.0), Point(0.0, -8.0, 60.0))
BUMP_CENTER = Point(0.5, -0.5, 0.25)


def catalog() -> list[CatalogEntry]:
    """Field catalog shared by every verification suite, versioned by ``CATALOG_VERSION``."""

    entries = [
        CatalogEntry(FieldSpec(kind="coordinate-x1"), True),
        CatalogEntry(FieldSpec(kind="coordinate-x2"), True),
        CatalogEntry(FieldSpec(kind="coordinate-t"), True),
        *(CatalogEntry(FieldSpec(kind="affine-positive", c=c), True) for c in (1.0, 2.0, 8.0)),
    ]
    gauge = calibrated_gauge()
    gauge_spec = FieldSpec(kind="gauge-power", alpha=gauge.alpha)
    entries.append(CatalogEntry(gauge_spec, gauge.admitted))
    entries.extend(
        CatalogEntry(FieldSpec(kind="translated", base=gauge_spec, offset=offset), gauge.admitted)
        for offset in TRANSLATION_OFFSETS
    )
    entries.extend(
        [
            CatalogEntry(
                FieldSpec(
                    kind="bump-modulated",
                    base=FieldSpec(kind="polynomial", expression="x1*x2 + t**2"),
                    offset=BUMP_CENTER,
                    width=1.5,
                ),
                False,
            ),
            CatalogEntry(
                FieldSpec(
                    kind="bump-modulated",
                    base=FieldSpec(kind="affine-positive", c=2.0),
                    offset=Point(0.0, 0.0, 0.0),
                    width=2.0,
                ),
                False,
            ),
            CatalogEntry(FieldSpec(kind="polynomial", expression="x1*x2"), True),
            CatalogEntry(FieldSpec(kind="polynomial", expression="x1**2 - x2**2 + t"), True),
            CatalogEntry(FieldSpec(kind="polynomial", expression="x1**2"), False),
            CatalogEntry(FieldSpec(kind="exponential-x1"), False),
        ]
    )
    return entries


def pseudoharmonic_entries() -> list[CatalogEntry]:
    return [entry for entry in catalog() if entry.pseudoharmonic]


def dilation_residual_ratio(alpha: float, p: Point, lam: float) -> float:
    """``Δ_b u_α(δ_λ p) / Δ_b u_α(p)``; equals ``λ^(−4α−2)`` by homogeneity."""

    _, lap_fn = _gauge_laplacian_function()
    base = float(lap_fn(p.x1, p.x2, p.t, alpha))
    scaled = float(lap_fn(lam * p.x1, lam * p.x2, lam * lam * p.t, alpha))
    if base == 0.0 or not math.isfinite(base):
        raise ValueError(f"Δ_b u_α vanishes or is singular at {p}")
    return scaled / base
