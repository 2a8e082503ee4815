from __future__ import annotations

import math

import pytest

from heislab import ccdist
from heislab.hgroup import Point
from heislab.sampling import (
    GridSpec,
    cc_ball_sample,
    dilate_points,
    grid_points,
    random_points,
    resolve_points,
)


def test_grid_spec_validation() -> None:
    with pytest.raises(ValueError, match="Unknown grid kind"):
        GridSpec(kind="sphere")
    with pytest.raises(ValueError, match="radii"):
        GridSpec(r_min=3.0, r_max=1.0)
    with pytest.raises(ValueError, match="count"):
        GridSpec(count=0)
    with pytest.raises(ValueError, match="phi_max"):
        GridSpec(phi_max=math.pi)


def test_ball_grid_respects_annulus_and_seed() -> None:
    spec = GridSpec(kind="ball", r_min=0.5, r_max=2.0, count=40, seed=5)
    points = grid_points(spec)
    assert len(points) == 40
    for p in points:
        assert 0.5 <= ccdist.cc_distance(p) <= 2.0
    assert grid_points(spec) == points
    assert grid_points(spec.with_seed(6)) != points


def test_shell_grid_layout() -> None:
    spec = GridSpec(kind="shell", r_min=1.0, r_max=4.0, count=5, radii_count=3, angles=2)
    points = grid_points(spec)
    # φ = 0 contributes one sign, the other four angles both signs.
    assert len(points) == 3 * (1 + 4 * 2) * 2
    radii = sorted({round(ccdist.cc_distance(p), 8) for p in points})
    assert radii == pytest.approx([1.0, 2.0, 4.0], rel=1e-8)


def test_shell_grid_excludes_axis_neighbourhood() -> None:
    spec = GridSpec(kind="shell", r_min=1.0, r_max=1.0, count=20, radii_count=1, min_s=0.2)
    assert all(p.s >= 0.2 for p in grid_points(spec))


def test_box_grid_filters_the_center() -> None:
    spec = GridSpec(kind="box", r_max=1.0, count=30, seed=2, min_r=0.3)
    points = grid_points(spec)
    assert len(points) == 30
    assert all(abs(p.x1) <= 1.0 and abs(p.t) <= 1.0 for p in points)
    assert all(ccdist.cc_distance(p) >= 0.3 for p in points)


def test_cc_ball_sample_and_dilation() -> None:
    points = cc_ball_sample(1.5, 25, seed=3, min_s=0.05)
    assert all(ccdist.cc_distance(p) <= 1.5 and p.s >= 0.05 for p in points)
    doubled = dilate_points(points, 2.0)
    for p, q in zip(points, doubled):
        assert ccdist.cc_distance(q) == pytest.approx(2.0 * ccdist.cc_distance(p), rel=1e-9)


def test_random_points_and_resolution() -> None:
    points = random_points(10, seed=1, bound=2.0)
    assert len(points) == 10
    assert all(max(abs(c) for c in p.as_tuple()) <= 2.0 for p in points)
    explicit = (Point(1.0, 0.0, 0.0), Point(0.0, 1.0, 0.0))
    assert resolve_points(explicit) == list(explicit)
    assert len(resolve_points(GridSpec(count=7, r_max=1.0, r_min=0.0))) == 7
