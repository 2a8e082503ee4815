from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heislab import ccdist
from heislab.hgroup import Point, ScalarField, apply_frame, dilate, group_inv
from heislab.sampling import shell_point


def test_distance_on_the_horizontal_plane() -> None:
    assert ccdist.cc_distance(Point(3.0, 4.0, 0.0)) == pytest.approx(5.0, rel=1e-15)


def test_distance_on_the_axis() -> None:
    assert ccdist.cc_distance(Point(0.0, 0.0, 1.0)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert ccdist.cc_distance(Point(0.0, 0.0, -4.0)) == pytest.approx(
        2.0 * math.sqrt(math.pi), rel=1e-14
    )


def test_distance_is_continuous_towards_the_axis() -> None:
    near = ccdist.cc_distance(Point(1e-7, 0.0, 1.0))
    assert near == pytest.approx(math.sqrt(math.pi), rel=1e-5)


def test_origin_and_degenerate_input() -> None:
    assert ccdist.cc_distance(Point(0.0, 0.0, 0.0)) == 0.0
    with pytest.raises(ccdist.DegenerateInputError):
        ccdist.solve_phi(0.0, 0.0)


def test_nu_limit_and_endpoint() -> None:
    assert ccdist.nu(0.0) == 1.0
    assert ccdist.nu(math.pi) == pytest.approx(math.pi, rel=1e-14)
    with pytest.raises(ValueError):
        ccdist.nu(4.0)


@pytest.mark.parametrize("func", [ccdist.mu, ccdist.mu_prime, ccdist.g, ccdist.g_prime])
def test_series_branches_are_continuous(func) -> None:
    below = func(ccdist.SERIES_CUTOFF * (1.0 - 1e-9))
    above = func(ccdist.SERIES_CUTOFF * (1.0 + 1e-9))
    assert below == pytest.approx(above, rel=1e-10)


def test_mu_small_angle_expansion() -> None:
    phi = 0.01
    assert ccdist.mu(phi) == pytest.approx(2 * phi / 3 + 4 * phi**3 / 45, rel=1e-9)


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.0, math.pi / 2, 2.5, 3.1])
def test_shell_points_lie_on_their_sphere(phi: float) -> None:
    for r in (0.5, 1.0, 7.0):
        p = shell_point(r, phi, 0.4, sign=-1.0)
        assert ccdist.cc_distance(p) == pytest.approx(r, rel=1e-10)


@pytest.mark.parametrize(
    "point", [Point(1.0, 0.0, 0.1), Point(0.2, -0.3, 2.0), Point(2.0, 1.0, -30.0)]
)
def test_closed_forms_agree(point: Point) -> None:
    evaluation = ccdist.evaluate_distance(point)
    assert evaluation.gap <= ccdist.AGREEMENT_TOLERANCE * evaluation.r
    assert evaluation.solution is not None
    assert evaluation.solution.residual <= 1e-12 * max(1.0, abs(point.t))


@pytest.mark.slow
def test_closed_forms_agree_across_scales() -> None:
    for s in np.logspace(-3.0, 3.0, 100):
        for t in np.logspace(-6.0, 6.0, 100):
            evaluation = ccdist.evaluate_distance(Point(float(s), 0.0, float(t)))
            assert evaluation.gap <= ccdist.AGREEMENT_TOLERANCE * evaluation.r, (s, t)


coordinate = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_subnormal=False)


@settings(max_examples=50, deadline=None)
@given(coordinate, coordinate, coordinate, st.floats(min_value=0.2, max_value=5.0))
def test_distance_is_homogeneous(x1: float, x2: float, t: float, lam: float) -> None:
    p = Point(x1, x2, t)
    if p.s < 1e-6 or abs(t) < 1e-6:
        return
    assert ccdist.cc_distance(dilate(p, lam)) == pytest.approx(
        lam * ccdist.cc_distance(p), rel=1e-9
    )


@settings(max_examples=50, deadline=None)
@given(coordinate, coordinate, coordinate, st.floats(min_value=0.0, max_value=2 * math.pi))
def test_distance_is_symmetric_and_rotation_invariant(
    x1: float, x2: float, t: float, angle: float
) -> None:
    p = Point(x1, x2, t)
    if 0.0 < p.s < 1e-6:
        return
    r = ccdist.cc_distance(p)
    assert ccdist.cc_distance(group_inv(p)) == pytest.approx(r, rel=1e-12, abs=1e-300)
    c, s = math.cos(angle), math.sin(angle)
    rotated = Point(c * x1 - s * x2, s * x1 + c * x2, t)
    assert ccdist.cc_distance(rotated) == pytest.approx(r, rel=1e-9, abs=1e-12)


def test_distance_between_is_symmetric() -> None:
    p = Point(1.0, 2.0, 3.0)
    q = Point(-0.5, 0.25, -1.0)
    assert ccdist.cc_distance_between(p, q) == pytest.approx(
        ccdist.cc_distance_between(q, p), rel=1e-12
    )
    assert ccdist.cc_distance_between(p, p) == 0.0


def test_near_axis_solve_keeps_precision() -> None:
    sol = ccdist.solve_phi(1e-3, 5.0)
    assert sol.phi > 3.0
    assert sol.sin_phi > 0.0
    assert sol.residual <= 1e-12 * 5.0


@pytest.mark.parametrize(
    "point", [Point(1.0, 0.5, 0.3), Point(-0.7, 1.2, -1.5), Point(0.4, 0.1, 0.8)]
)
def test_horizontal_gradient_is_unit_and_matches_finite_differences(point: Point) -> None:
    g1, g2 = ccdist.horizontal_gradient(point)
    assert g1 * g1 + g2 * g2 == pytest.approx(1.0, abs=1e-12)
    field = ScalarField.numeric(lambda a, b, c: ccdist.cc_distance(Point(a, b, c)), "r")
    bundle = apply_frame(field, point)
    assert bundle.fe1 == pytest.approx(g1, abs=1e-7)
    assert bundle.fe2 == pytest.approx(g2, abs=1e-7)


def test_t_derivatives_on_the_plane() -> None:
    p = Point(2.0, 0.0, 0.0)
    derivs = ccdist.distance_derivatives(p)
    assert derivs.r_t == 0.0
    assert derivs.r_tt == pytest.approx(3.0 / (4.0 * 8.0), rel=1e-12)
    with pytest.raises(ccdist.AxisError):
        ccdist.distance_derivatives(Point(0.0, 0.0, 1.0))
