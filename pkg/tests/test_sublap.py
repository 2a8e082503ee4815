from __future__ import annotations

import math

import pytest

from heislab import sublap
from heislab.hgroup import Point, ScalarField, dilate
from heislab.sampling import random_points, shell_point


def _poly(expression: str) -> ScalarField:
    return ScalarField.from_expr(expression, label=expression, provenance="polynomial")


@pytest.mark.parametrize(
    ("expression", "expected"),
    [("x1**2", 1.0), ("x1**2 + x2**2", 2.0), ("t", 0.0), ("x1*x2", 0.0), ("t**2", None)],
)
def test_sublaplacian_anchors(expression: str, expected: float | None) -> None:
    p = Point(0.3, -0.7, 0.2)
    value = sublap.sublap(_poly(expression), p)
    if expected is None:
        # Δ_b t² = 4 s².
        expected = 4.0 * (p.x1**2 + p.x2**2)
    assert value == pytest.approx(expected, abs=1e-12)


def test_gradient_norm_conventions() -> None:
    p = Point(1.0, 2.0, 0.5)
    field = _poly("t")
    # X1 t = 2 x2, X2 t = −2 x1.
    assert sublap.hgrad_sq(field, p) == pytest.approx(0.5 * (16.0 + 4.0))
    assert sublap.hgrad_sq(field, p, sublap.FRAME_NORM) == pytest.approx(20.0)


def test_symbolic_operators_match_numeric() -> None:
    field = ScalarField.from_expr("exp(x1) * sin(t) + x2**3", label="f")
    p = Point(0.4, -0.3, 1.1)
    lap = ScalarField.from_expr(sublap.sublap_expr(field.expr), label="Δ_b f")
    grad = ScalarField.from_expr(sublap.hgrad_sq_expr(field.expr), label="|∇_b f|²")
    assert lap(p) == pytest.approx(sublap.sublap(field, p), rel=1e-12)
    assert grad(p) == pytest.approx(sublap.hgrad_sq(field, p), rel=1e-12)


def test_operator_conventions_are_validated() -> None:
    assert sublap.HALF_NORM.as_dict() == {
        "laplacian_scale": 0.5,
        "gradient_scale": 0.5,
        "t_field_scale": 2.0,
    }
    with pytest.raises(ValueError):
        sublap.OperatorConventions(gradient_scale=2.0)
    with pytest.raises(ValueError):
        sublap.OperatorConventions(laplacian_scale=1.0)


def test_displayed_profile_values() -> None:
    assert sublap.sublap_r_closed(1e-9) == 1.5
    assert sublap.sublap_r_closed(1e-3) == pytest.approx(1.5, rel=1e-5)
    assert sublap.sublap_r_closed(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        sublap.sublap_r_closed(0.0)


def test_cartesian_profile_values() -> None:
    assert sublap.sublap_r_cartesian(1e-9) == 2.0
    assert sublap.sublap_r_cartesian(1e-3) == pytest.approx(2.0, rel=1e-5)
    assert sublap.sublap_r_cartesian(math.pi / 2) == pytest.approx(math.pi**2 / 8, rel=1e-12)
    assert sublap.sublap_r_cartesian(3.1) < 0.0


@pytest.mark.parametrize("phi", [0.2, 0.8, 1.4, 2.2])
@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_numeric_sublaplacian_matches_cartesian_profile(phi: float, radius: float) -> None:
    p = shell_point(radius, phi, 0.7)
    measured = radius * sublap.sublap_r_numeric(p)
    assert measured == pytest.approx(sublap.sublap_r_cartesian(phi), rel=1e-5, abs=1e-6)


def test_numeric_sublaplacian_on_the_plane() -> None:
    # r Δ_b r = 2 on t = 0.
    p = Point(1.5, -0.5, 0.0)
    assert p.s * sublap.sublap_r_numeric(p) == pytest.approx(2.0, rel=1e-6)


def test_singular_region_is_rejected() -> None:
    with pytest.raises(sublap.SingularRegionError) as excinfo:
        sublap.sublap_r_numeric(Point(0.01, 0.0, 1.0))
    assert excinfo.value.point == Point(0.01, 0.0, 1.0)
    with pytest.raises(sublap.SingularRegionError):
        sublap.check_smooth_region(Point(0.03, 0.0, 0.0))
    assert sublap.check_smooth_region(Point(3.0, 4.0, 0.0)) == pytest.approx(5.0)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_numeric_sublaplacian_scales_under_dilation(lam: float) -> None:
    checked = 0
    for p in random_points(200, seed=11):
        q = dilate(p, lam)
        try:
            r = sublap.check_smooth_region(p, min_s=0.5, min_r=0.5)
            sublap.check_smooth_region(q, min_s=0.5, min_r=0.5)
        except sublap.SingularRegionError:
            continue
        base = sublap.sublap_r_numeric(p)
        scaled = sublap.sublap_r_numeric(q)
        assert abs(lam * scaled - base) <= 1e-4 * max(abs(base), 1.0 / r), p
        checked += 1
    assert checked >= 150
