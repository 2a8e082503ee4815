from __future__ import annotations

import math

import numpy as np
import pytest

from heislab import comparison
from heislab.comparison import BoundFamily, ComparisonParams
from heislab.hgroup import Point
from heislab.sampling import GridSpec, shell_point

SMALL_SHELL = GridSpec(
    kind="shell", r_min=1.0, r_max=2.0, count=5, phi_max=2.0, radii_count=2, angles=1, min_s=0.06
)


@pytest.mark.parametrize(("ell", "expected"), [(0.0, 0.5), (1.0, 1.0), (3.0, 1.5)])
def test_m1_is_the_positive_root(ell: float, expected: float) -> None:
    m = comparison.m1_of_l(ell)
    assert m == pytest.approx(expected, rel=1e-15)
    assert 2.0 * m * m - m - ell == pytest.approx(0.0, abs=1e-14)


def test_m1_rejects_negative_l() -> None:
    with pytest.raises(ValueError):
        comparison.m1_of_l(-1.0)


def test_params_validation() -> None:
    with pytest.raises(ValueError, match="l must be nonnegative"):
        ComparisonParams(l=-0.5)
    with pytest.raises(ValueError, match="delta1"):
        ComparisonParams(delta1=1.0)
    with pytest.raises(ValueError, match="finite"):
        ComparisonParams(k2=math.nan)


def test_theorem_family_by_sign_of_k2() -> None:
    assert comparison.theorem_family(ComparisonParams(l=1.0)) == BoundFamily("flat", 1.0)
    assert comparison.theorem_family(ComparisonParams(k2=1.0)) == BoundFamily("positive", 0.5, 0.5)
    assert comparison.theorem_family(ComparisonParams(k2=-1.0)) == BoundFamily(
        "negative", 1.0, 1.5
    )


def test_family_validation_and_values() -> None:
    with pytest.raises(ValueError, match="flat family"):
        BoundFamily("flat", 0.5, 1.0)
    with pytest.raises(ValueError, match="K must be positive"):
        BoundFamily("positive", 0.5)
    with pytest.raises(ValueError, match="m must be positive"):
        BoundFamily("negative", 0.0, 1.0)
    assert BoundFamily("flat", 0.5).bound(2.0) == 0.25
    positive = BoundFamily("positive", 1.0, 1.0)
    assert positive.singular_radius == pytest.approx(math.pi)
    assert positive.bound(math.pi / 4) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="cot bound"):
        positive.bound(4.0)
    assert BoundFamily("negative", 1.0, 1.0).bound(50.0) == pytest.approx(1.0)


def test_validity_radius_and_range() -> None:
    params = ComparisonParams(k2=1.0, l=4.0)
    assert comparison.validity_radius(params) == pytest.approx(math.sqrt(8.0))
    family = comparison.theorem_family(params)
    lo, hi = comparison.validity_range(params, family)
    assert lo == pytest.approx(math.sqrt(8.0))
    assert lo < hi < family.singular_radius
    assert comparison.validity_radius(ComparisonParams(k2=-2.0, l=1.0)) == pytest.approx(1.0)
    assert comparison.validity_range(ComparisonParams(), BoundFamily("flat", 0.5)) == pytest.approx(
        (0.1, 10.1)
    )


def test_validity_range_beyond_cot_singularity() -> None:
    params = ComparisonParams(k2=1.0, l=100.0)
    with pytest.raises(comparison.ValidityRangeError) as excinfo:
        comparison.validity_range(params, comparison.theorem_family(params))
    assert excinfo.value.required_radius == pytest.approx(math.sqrt(200.0))


def test_flat_riccati_solution_is_exact() -> None:
    trajectory = comparison.riccati_integrate(ComparisonParams(), 5.0, 0.1, 10.0)
    assert not trajectory.blew_up
    assert len(trajectory.radii) == comparison.DEFAULT_STEPS + 1
    np.testing.assert_allclose(trajectory.values, 0.5 / trajectory.radii, rtol=1e-6)


def test_negative_curvature_fixed_point() -> None:
    trajectory = comparison.riccati_integrate(ComparisonParams(k2=-1.0), 2.0, 0.1, 20.0)
    assert trajectory.final == pytest.approx(math.sqrt(0.5), abs=1e-8)


def test_riccati_blow_up_is_recorded() -> None:
    trajectory = comparison.riccati_integrate(ComparisonParams(k2=1.0), -1.0, 0.1, 10.0)
    assert trajectory.blew_up
    assert 0.1 < trajectory.blowup_radius < 10.0
    assert len(trajectory.values) == len(trajectory.radii)
    assert np.all(np.isfinite(trajectory.values))


def test_riccati_integration_is_deterministic() -> None:
    params = ComparisonParams(k2=-1.0, l=1.0)
    first = comparison.riccati_integrate(params, 1.0, 1.5, 5.0, steps=500)
    second = comparison.riccati_integrate(params, 1.0, 1.5, 5.0, steps=500)
    assert np.array_equal(first.values, second.values)


def test_riccati_input_validation() -> None:
    with pytest.raises(ValueError, match="steps"):
        comparison.riccati_integrate(ComparisonParams(), 1.0, 0.1, 1.0, steps=10)
    with pytest.raises(ValueError, match="r0 < r1"):
        comparison.riccati_integrate(ComparisonParams(), 1.0, 1.0, 0.5)
    with pytest.raises(ValueError, match="finite"):
        comparison.riccati_integrate(ComparisonParams(), math.inf, 0.1, 1.0)


@pytest.mark.parametrize(
    "params",
    [ComparisonParams(), ComparisonParams(l=1.0), ComparisonParams(k2=-1.0, l=1.0),
     ComparisonParams(k2=1.0, l=0.5)],
)
def test_verify_comparison_passes_on_theorem_families(params: ComparisonParams) -> None:
    report = comparison.verify_comparison(params, comparison.theorem_family(params))
    assert report.ok
    assert report.entries[0].name.startswith("domination [")
    assert report.entries[1].name.startswith("minimal m [")


def test_verify_comparison_detects_a_trajectory_above_the_bound() -> None:
    params = ComparisonParams()
    family = BoundFamily("flat", 0.5)
    report = comparison.verify_comparison(params, family, (1.0, 5.0), y0=2.0)
    assert not report.ok


def test_verify_comparison_rejects_bad_ranges() -> None:
    params = ComparisonParams(k2=-1.0, l=1.0)
    family = comparison.theorem_family(params)
    with pytest.raises(comparison.ValidityRangeError) as excinfo:
        comparison.verify_comparison(params, family, (0.5, 3.0))
    assert excinfo.value.required_radius == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValueError, match="does not match"):
        comparison.verify_comparison(params, BoundFamily("flat", 0.5))


def test_measured_constant_follows_the_cartesian_profile() -> None:
    measurement = comparison.measure_comparison_constant(SMALL_SHELL)
    assert measurement.count == len(measurement.values)
    assert measurement.sup == pytest.approx(measurement.closed_form_sup, rel=1e-4)
    assert measurement.sup == pytest.approx(2.0, rel=1e-4)
    assert measurement.profile_sup == pytest.approx(1.5)
    assert measurement.argmax_phi == pytest.approx(0.0, abs=1e-6)


def test_measured_l_is_finite() -> None:
    value = comparison.measure_l(SMALL_SHELL)
    assert math.isfinite(value)
    assert value >= 0.0


def test_l31_bounds_on_explicit_points() -> None:
    points = [shell_point(r, phi, 0.3) for r in (0.5, 2.0) for phi in (0.4, 1.2, 2.0)]
    report = comparison.verify_l31_bounds(points, ring_radii=(1.0, 5.0), ring_count=4)
    names = [entry.name for entry in report.entries]
    assert "r_t vs finite differences" in names
    assert not any(name.startswith("refinement change") for name in names)
    assert report.ok


def test_derivative_sups_skip_the_axis() -> None:
    sups = comparison.derivative_sups([shell_point(1.0, 0.0, 0.0), shell_point(1.0, 0.0, 0.0)])
    assert sups.count == 2
    assert comparison.derivative_sups([Point(0.0, 0.0, 1.0)]).count == 0


def test_radial_identity_diagnostic() -> None:
    results = comparison.radial_identity_diagnostic(radii=(1.0, 2.0), count=4)
    assert len(results) == 8
    for item in results:
        s = item.point.s
        assert item.cartesian_residual == pytest.approx(0.0, abs=1e-12)
        assert item.profile_residual == pytest.approx(-3.0 / (s * s), rel=1e-12)
        assert abs(item.residual) * s * s < 1e-3
