from __future__ import annotations

import math

import pytest

from heislab import ccdist, estimates
from heislab.bochner import PositivityError
from heislab.hgroup import Point
from heislab.pharm import make_field, parse_field_spec
from heislab.sampling import GridSpec

SMALL_GRID = GridSpec(kind="ball", r_min=0.0, r_max=1.0, count=200, seed=1)


def _field(text: str):
    return make_field(parse_field_spec(text))


@pytest.mark.parametrize("R", [1.0, 10.0, 100.0])
def test_cutoff_profile_and_certificate(R: float) -> None:
    eta = estimates.build_cutoff(R)
    assert eta(0.0) == 1.0
    assert eta(R) == 1.0
    assert eta(1.5 * R) == pytest.approx(0.5, rel=1e-12)
    assert eta(2.0 * R) == 0.0
    assert eta(3.0 * R) == 0.0
    certificate = eta.certify()
    assert certificate.ok
    assert certificate.first_ratio <= math.pi + 1e-9
    assert certificate.second_ratio == pytest.approx(math.pi**2 / 2, rel=1e-3)


def test_cutoff_derivatives_vanish_outside_the_band() -> None:
    eta = estimates.build_cutoff(2.0)
    assert eta.derivative(1.0) == 0.0
    assert eta.second_derivative(5.0) == 0.0
    assert eta.derivative(3.0) == pytest.approx(-math.pi / 4.0, rel=1e-12)


def test_build_cutoff_rejects_invalid_radius() -> None:
    for R in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError, match="R must be positive"):
            estimates.build_cutoff(R)


def test_estimate_bound_reference_value() -> None:
    params = estimates.EstimateParams()
    assert estimates.estimate_bound(params) == pytest.approx(21.6, rel=1e-14)
    assert estimates.weak_bound(params, C3=1.0) == pytest.approx(21.6, rel=1e-14)
    larger_b = estimates.EstimateParams(b=4.0, C2=2.0, R=4.0)
    assert estimates.estimate_bound(larger_b) == pytest.approx(7.2 * (0.5 + 0.5), rel=1e-14)


@pytest.mark.parametrize(
    "kwargs",
    [{"n": 2}, {"k": -1.0}, {"b": 0.0}, {"R": -2.0}, {"C2": -0.5}],
)
def test_estimate_params_validation(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        estimates.EstimateParams(**kwargs)


def test_gradient_ratio_values() -> None:
    u = _field("affine-positive:2")
    # |∇_b (2 + x1)|² = ½ and T u = 0.
    assert estimates.gradient_ratio(u, Point(0.0, 0.0, 0.0), b=1.0) == pytest.approx(0.125)
    with pytest.raises(PositivityError):
        estimates.gradient_ratio(_field("coordinate-x1"), Point(-1.0, 0.0, 0.0), b=1.0)


def test_constant_field_has_zero_ratio() -> None:
    report = estimates.verify_gradient_estimate(
        _field("constant:1"), estimates.EstimateParams(), SMALL_GRID
    )
    assert report.sup_ratio == 0.0
    assert report.passed
    assert report.margin == pytest.approx(21.6)
    assert report.grid_size > 0


def test_preconditions_reject_control_fields() -> None:
    params = estimates.EstimateParams(R=0.5)
    with pytest.raises(estimates.PreconditionError, match="not positive") as excinfo:
        estimates.verify_gradient_estimate(_field("coordinate-x1"), params, SMALL_GRID)
    assert excinfo.value.point is not None
    with pytest.raises(estimates.PreconditionError, match="not pseudoharmonic"):
        estimates.verify_gradient_estimate(_field("polynomial:x1**2 + 1"), params, SMALL_GRID)


def test_calibrated_constant_makes_the_estimate_pass() -> None:
    u = _field("affine-positive:2")
    radii = (0.25, 0.5)
    C2 = estimates.calibrate_C2(u, 1.0, radii, SMALL_GRID)
    assert C2 >= 0.0
    for R in radii:
        params = estimates.EstimateParams(b=1.0, C2=C2 * (1 + 1e-6) + 1e-6, R=R)
        report = estimates.verify_gradient_estimate(u, params, SMALL_GRID)
        assert report.passed
        assert 0.0 < report.sup_ratio <= 0.5 / (2.0 - R) ** 2 + 1e-12
    with pytest.raises(ValueError):
        estimates.calibrate_C2(u, 1.0, [])


def test_sphere_probes_lie_on_the_sphere() -> None:
    for R in (0.5, 3.0):
        probes = estimates.sphere_probes(R)
        assert len(probes) == 6
        for p in probes:
            assert ccdist.cc_distance(p) == pytest.approx(R, rel=1e-12)


def test_liouville_probe_for_constant_field() -> None:
    report = estimates.liouville_probe(_field("constant:1"), (1.0, 2.0), b=1.0, grid=SMALL_GRID)
    assert [entry.name for entry in report.entries] == [
        "sup ratio R=1",
        "sup ratio R=2",
        "non-increasing trend",
    ]
    assert report.ok
    assert report.entries[-1].value == 1.0


def test_liouville_probe_records_positivity_failures() -> None:
    report = estimates.liouville_probe(
        _field("affine-positive:1"), (0.5, 2.0), b=1.0, grid=SMALL_GRID
    )
    first, second = report.entries[:2]
    assert first.passed
    assert not second.passed
    assert "positivity fails" in second.note
    assert math.isnan(second.value)


def test_aux_functional() -> None:
    u = _field("affine-positive:2")
    origin = Point(0.0, 0.0, 0.0)
    assert estimates.aux_functional(u, origin, 1.0, 1.0, 1.0) == pytest.approx(0.125)
    assert estimates.aux_functional(u, origin, 0.0, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError, match="t_param"):
        estimates.aux_functional(u, origin, 1.5, 1.0, 1.0)
    with pytest.raises(PositivityError):
        estimates.aux_functional(_field("coordinate-x1"), Point(-1.0, 0.0, 0.0), 0.5, 1.0, 1.0)
