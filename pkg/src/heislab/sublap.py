"""Sub-Laplacian and horizontal-gradient operators on H¹ and the closed forms of ``r Δ_b r``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import sympy

from heislab import ccdist
from heislab.hgroup import Point, ScalarField, apply_frame, frame_x1, frame_x2

SMOOTH_REGION_S = 0.05
SMOOTH_REGION_R = 0.05


class SingularRegionError(ValueError):
    """Raised when a finite-difference stencil would straddle the center or the axis."""

    def __init__(self, point: Point, *, min_s: float, min_r: float) -> None:
        super().__init__(
            f"Point {point} lies inside the excluded region (s ≤ {min_s} or r ≤ {min_r})."
        )
        self.point = point


@dataclass(frozen=True, slots=True)
class OperatorConventions:
    """Normalisation constants stamped into every report."""

    laplacian_scale: float = 0.5
    gradient_scale: float = 0.5
    t_field_scale: float = 2.0

    def __post_init__(self) -> None:
        if self.laplacian_scale != 0.5 or self.t_field_scale != 2.0:
            raise ValueError("laplacian_scale is fixed at 1/2 and t_field_scale at 2")
        if self.gradient_scale not in (0.5, 1.0):
            raise ValueError(f"gradient_scale must be 1/2 or 1, got {self.gradient_scale!r}")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


HALF_NORM = OperatorConventions(gradient_scale=0.5)
FRAME_NORM = OperatorConventions(gradient_scale=1.0)


def sublap(f: ScalarField, p: Point) -> float:
    """``Δ_b f = ½ (X1² + X2²) f`` via expanded coordinate partials."""

    bundle = apply_frame(f, p)
    return 0.5 * (bundle.fe1e1 + bundle.fe2e2)


def hgrad_sq(f: ScalarField, p: Point, conventions: OperatorConventions = HALF_NORM) -> float:
    """``gradient_scale · ((X1 f)² + (X2 f)²)``."""

    bundle = apply_frame(f, p)
    return conventions.gradient_scale * (bundle.fe1**2 + bundle.fe2**2)


def sublap_expr(expr: sympy.Expr) -> sympy.Expr:
    """Symbolic ``½ (X1² + X2²)``."""

    return sympy.Rational(1, 2) * (frame_x1(frame_x1(expr)) + frame_x2(frame_x2(expr)))


def hgrad_sq_expr(expr: sympy.Expr, conventions: OperatorConventions = HALF_NORM) -> sympy.Expr:
    scale = sympy.Rational(1, 2) if conventions.gradient_scale == 0.5 else sympy.Integer(1)
    return scale * (frame_x1(expr) ** 2 + frame_x2(expr) ** 2)


def _check_phi_open(phi: float) -> None:
    if not 0.0 < phi < math.pi:
        raise ValueError(f"phi must lie in (0, π), got {phi!r}")


def sublap_r_closed(phi: float) -> float:
    """Closed-form profile ``F(φ) = φ sin²φ cosφ / (2 (sinφ − φ cosφ))`` of ``r Δ_b r``.

    Tends to ``3/2`` as ``φ → 0⁺`` and vanishes at ``π/2`` and ``π``.
    """

    _check_phi_open(phi)
    if phi < 1e-8:
        return 1.5
    sin_phi = math.sin(phi)
    return phi * sin_phi * sin_phi * math.cos(phi) / (2.0 * ccdist.sin_minus_phicos(phi))


def sublap_r_cartesian(phi: float) -> float:
    """``r Δ_b r`` from the Cartesian expansion of ``½ (X1² + X2²)`` applied to ``r``.

    With ``Δ_b r = ½ (r_ss + r_s / s) + 2 s² r_tt`` for a radial field this reduces to
    ``φ² sinφ / (2 (sinφ − φ cosφ)) + φ cosφ / (2 sinφ)``: ``2`` at ``φ = 0``,
    ``π²/8`` at ``π/2`` and ``−∞`` towards the axis.
    """

    _check_phi_open(phi)
    if phi < 1e-8:
        return 2.0
    sin_phi = math.sin(phi)
    cos_phi = math.cos(phi)
    return phi * phi * sin_phi / (2.0 * ccdist.sin_minus_phicos(phi)) + phi * cos_phi / (
        2.0 * sin_phi
    )


def distance_field() -> ScalarField:
    """``r`` as a numeric-only field (finite differences for its derivatives)."""

    return ScalarField.numeric(
        lambda x1, x2, t: ccdist.cc_distance(Point(x1, x2, t)), label="cc-distance"
    )


def check_smooth_region(
    p: Point, *, min_s: float = SMOOTH_REGION_S, min_r: float = SMOOTH_REGION_R
) -> float:
    """Return ``r(p)`` or raise if ``p`` is too close to the center or the axis."""

    r = ccdist.cc_distance(p)
    if p.s <= min_s or r <= min_r:
        raise SingularRegionError(p, min_s=min_s, min_r=min_r)
    return r


def sublap_r_numeric(p: Point) -> float:
    """Finite-difference ``Δ_b r`` at ``p`` (Cartesian expansion).

    Raises
    ------
    SingularRegionError
        If ``s ≤ 0.05`` or ``r ≤ 0.05``.
    """

    check_smooth_region(p)
    return sublap(distance_field(), p)
