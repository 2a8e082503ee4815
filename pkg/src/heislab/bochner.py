"""Numerical checks of the CR Bochner identity and its companions on H¹.

On H¹ the Ricci, torsion and Webster terms vanish, so with the half norm
``⟨a, b⟩ = ½ (a1 b1 + a2 b2)`` the identity reads

``Δ_b |∇_b f|² = 2 |(∇^H)² f|² + 2 ⟨∇_b f, ∇_b Δ_b f⟩ + 4 ⟨J ∇_b f, ∇_b f0⟩``

with ``|(∇^H)² f|² = 2 (|f11|² + |f11̄|²)``, ``Z = ½ (X1 − i X2)``, ``f11 = Z Z f``,
``f11̄ = Z̄ Z f`` and ``J e1 = e2``, ``J e2 = −e1``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import sympy

from heislab.hgroup import (
    DerivativeBundle,
    Point,
    ScalarField,
    apply_frame,
    frame_t,
)
from heislab.report import VerificationReport
from heislab.sampling import GridSpec, resolve_points
from heislab.sublap import hgrad_sq_expr, sublap, sublap_expr

PHARM_TOLERANCE = 1e-8
NUMERIC_TOLERANCE_FACTOR = 1e3


class PositivityError(ValueError):
    """Raised when a field required to be positive is not."""

    def __init__(self, point: Point, value: float, label: str = "u") -> None:
        super().__init__(f"Field '{label}' is not positive at {point} (value {value!r}).")
        self.point = point
        self.value = value


@dataclass(frozen=True, slots=True)
class BochnerReport:
    """All terms of the Bochner identity at one point (half norm)."""

    lhs: float
    hess_term: float
    transport_term: float
    curvature_term: float
    j_term: float
    residual: float
    point: Point
    f11_sq: float
    f11bar_sq: float
    sublap_f: float
    f0: float
    grad_sq: float
    grad_f0_sq: float
    analytic: bool = True

    @property
    def scale(self) -> float:
        terms = (self.lhs, self.hess_term, self.transport_term, self.j_term)
        return max(1.0, *(abs(term) for term in terms))

    def inequality_gap(self, nu: float) -> float:
        """``lhs − rhs`` of the Bochner inequality for parameter ``ν > 0`` (nonnegative)."""

        if not nu > 0:
            raise ValueError("nu must be positive")
        rhs = (
            4.0 * self.f11_sq
            + self.sublap_f**2
            + self.f0**2
            + self.transport_term
            - (4.0 / nu) * self.grad_sq
            - 2.0 * nu * self.grad_f0_sq
        )
        return self.lhs - rhs


def complex_hessian_sq(bundle: DerivativeBundle) -> tuple[float, float]:
    """``(|f11|², |f11̄|²)`` from the real frame bundle."""

    a, d = bundle.fe1e1, bundle.fe2e2
    # f11 = ¼ [(X1X1 − X2X2) f − i (X1X2 + X2X1) f]
    f11_sq = ((a - d) ** 2 + (bundle.fe1e2 + bundle.fe2e1) ** 2) / 16.0
    # f11̄ = ¼ [(X1X1 + X2X2) f + i (X2X1 − X1X2) f] = ½ (Δ_b f + i f0)
    f11bar_sq = ((a + d) ** 2 + (bundle.fe1e2 - bundle.fe2e1) ** 2) / 16.0
    return f11_sq, f11bar_sq


def _numeric_derived(f: ScalarField, transform, label: str) -> ScalarField:
    return ScalarField.numeric(lambda x1, x2, t: transform(f, Point(x1, x2, t)), label=label)


def _gradient_sq_field(f: ScalarField) -> ScalarField:
    return f.companion("grad_sq", lambda: _build_gradient_sq(f))


def _build_gradient_sq(f: ScalarField) -> ScalarField:
    if f.expr is not None:
        return f.derived(hgrad_sq_expr(f.expr), label=f"|∇_b {f.label}|²")
    return _numeric_derived(
        f,
        lambda field, q: 0.5 * (apply_frame(field, q).fe1 ** 2 + apply_frame(field, q).fe2 ** 2),
        f"|∇_b {f.label}|²",
    )


def _sublap_field(f: ScalarField) -> ScalarField:
    return f.companion("sublap", lambda: _build_sublap(f))


def _build_sublap(f: ScalarField) -> ScalarField:
    if f.expr is not None:
        return f.derived(sublap_expr(f.expr), label=f"Δ_b {f.label}")
    return _numeric_derived(f, sublap, f"Δ_b {f.label}")


def _t_field(f: ScalarField) -> ScalarField:
    return f.companion("T", lambda: _build_t(f))


def _build_t(f: ScalarField) -> ScalarField:
    if f.expr is not None:
        return f.derived(frame_t(f.expr), label=f"T {f.label}")
    return _numeric_derived(f, lambda field, q: apply_frame(field, q).f0, f"T {f.label}")


def bochner_terms(f: ScalarField, p: Point) -> BochnerReport:
    """Evaluate every term of the Bochner identity for ``f`` at ``p``.

    The left side is the sub-Laplacian of the analytically differentiated
    ``|∇_b f|²``; fields without analytic partials fall back to nested finite
    differences and are flagged with ``analytic=False``.

    Raises
    ------
    EvaluationError
        If any derivative evaluates to NaN/Inf.
    """

    bundle = apply_frame(f, p)
    lhs = sublap(_gradient_sq_field(f), p)
    f11_sq, f11bar_sq = complex_hessian_sq(bundle)
    hess_term = 4.0 * (f11_sq + f11bar_sq)

    lap_bundle = apply_frame(_sublap_field(f), p)
    transport_term = bundle.fe1 * lap_bundle.fe1 + bundle.fe2 * lap_bundle.fe2

    f0_bundle = apply_frame(_t_field(f), p)
    # 4 ⟨J∇f, ∇f0⟩ with J(a, b) = (−b, a) and ⟨·,·⟩ = ½ Σ
    j_term = 2.0 * (bundle.fe1 * f0_bundle.fe2 - bundle.fe2 * f0_bundle.fe1)
    # Ric = Tor = 0 on H¹.
    curvature_term = 0.0

    residual = lhs - (hess_term + transport_term + curvature_term + j_term)
    return BochnerReport(
        lhs=lhs,
        hess_term=hess_term,
        transport_term=transport_term,
        curvature_term=curvature_term,
        j_term=j_term,
        residual=residual,
        point=p,
        f11_sq=f11_sq,
        f11bar_sq=f11bar_sq,
        sublap_f=0.5 * (bundle.fe1e1 + bundle.fe2e2),
        f0=bundle.f0,
        grad_sq=0.5 * (bundle.fe1**2 + bundle.fe2**2),
        grad_f0_sq=0.5 * (f0_bundle.fe1**2 + f0_bundle.fe2**2),
        analytic=f.has_partials,
    )


def commute_T_residual(f: ScalarField, p: Point) -> float:
    """``Δ_b (T f)(p) − T (Δ_b f)(p)``; zero on H¹ where the torsion vanishes."""

    return sublap(_t_field(f), p) - apply_frame(_sublap_field(f), p).f0


@dataclass(frozen=True, slots=True)
class LogIdentityResult:
    """Residual of ``Δ_b f0 = −2 ⟨∇_b f, ∇_b f0⟩`` for ``f = ln u`` and ``|Δ_b u|``."""

    residual: float
    sublap_u: float
    point: Point


def _log_field(u: ScalarField) -> ScalarField:
    return u.companion("log", lambda: _build_log(u))


def _build_log(u: ScalarField) -> ScalarField:
    if u.expr is not None:
        return u.derived(sympy.log(u.expr), label=f"ln {u.label}")
    return ScalarField.numeric(lambda x1, x2, t: math.log(u(Point(x1, x2, t))), f"ln {u.label}")


def log_identity_residual(u: ScalarField, p: Point) -> LogIdentityResult:
    """Evaluate ``Δ_b f0 + 2 ⟨∇_b f, ∇_b f0⟩`` with ``f = ln u`` (``V(f) = 0`` on H¹).

    Raises
    ------
    PositivityError
        If ``u(p) ≤ 0``.
    """

    value = u(p)
    if value <= 0:
        raise PositivityError(p, value, u.label)
    f = _log_field(u)
    f_bundle = apply_frame(f, p)
    f0_field = _t_field(f)
    f0_bundle = apply_frame(f0_field, p)
    lap_f0 = 0.5 * (f0_bundle.fe1e1 + f0_bundle.fe2e2)
    inner = 0.5 * (f_bundle.fe1 * f0_bundle.fe1 + f_bundle.fe2 * f0_bundle.fe2)
    return LogIdentityResult(residual=lap_f0 + 2.0 * inner, sublap_u=sublap(u, p), point=p)


def pharm_check(
    u: ScalarField,
    grid: GridSpec | Sequence[Point],
    *,
    tolerance: float = PHARM_TOLERANCE,
) -> VerificationReport:
    """Check ``Δ_b u = 0`` on ``grid``: ``sup |Δ_b u| / sup |u| ≤ tolerance``.

    Raises
    ------
    EvaluationError
        Carrying the offending point when ``u`` is singular on the grid.
    """

    points = resolve_points(grid)
    if not u.has_partials:
        tolerance *= NUMERIC_TOLERANCE_FACTOR
    sup_lap = 0.0
    sup_u = 0.0
    worst = points[0] if points else None
    for p in points:
        lap = abs(sublap(u, p))
        if lap > sup_lap:
            sup_lap, worst = lap, p
        sup_u = max(sup_u, abs(u(p)))
    ratio = sup_lap / sup_u if sup_u > 0 else sup_lap
    report = VerificationReport(suite="pharm-check")
    report.add(
        f"sup|Δ_b u|/sup|u| [{u.label}]",
        ratio,
        tolerance,
        note=f"worst point {worst}; {len(points)} points",
    )
    return report
