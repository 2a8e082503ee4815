"""Deterministic point grids on H¹ (CC balls, CC shells, coordinate boxes)."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from heislab import ccdist
from heislab.hgroup import Point, dilate

GRID_KINDS = ("ball", "shell", "box")
MAX_REJECTION_ROUNDS = 1000


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Sampling specification shared by every suite.

    ``ball`` rejection-samples the CC annulus ``r_min ≤ r ≤ r_max`` from the box
    ``[−r_max, r_max]² × [−r_max², r_max²]`` with ``numpy.random.default_rng(seed)``.
    ``shell`` is a lattice over CC spheres parametrised by ``φ ∈ [0, phi_max]``
    (``count`` values per radius, both signs of ``t``, ``angles`` rotations).
    ``box`` samples the coordinate box uniformly.  ``min_s``/``min_r`` exclude the
    axis and the center.
    """

    kind: str = "ball"
    r_min: float = 0.5
    r_max: float = 5.0
    count: int = 200
    seed: int = 0
    min_s: float = 0.0
    min_r: float = 0.0
    phi_max: float = 3.0
    radii_count: int = 5
    angles: int = 2

    def __post_init__(self) -> None:
        if self.kind not in GRID_KINDS:
            raise ValueError(f"Unknown grid kind '{self.kind}'; expected one of {GRID_KINDS}")
        if not 0 <= self.r_min <= self.r_max or self.r_max <= 0:
            raise ValueError("Grid radii must satisfy 0 ≤ r_min ≤ r_max with r_max > 0")
        if self.count < 1:
            raise ValueError("Grid count must be positive")
        if not 0 <= self.phi_max < math.pi:
            raise ValueError("phi_max must lie in [0, π)")

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)

    def with_seed(self, seed: int) -> GridSpec:
        return replace(self, seed=seed)


def shell_point(r: float, phi: float, theta: float, sign: float = 1.0) -> Point:
    """Point at distance ``r`` with parameter ``φ`` and horizontal angle ``θ``."""

    s = r / ccdist.g(phi)
    t = math.copysign(ccdist.mu(phi) * s * s, sign)
    return Point(s * math.cos(theta), s * math.sin(theta), t)


def _shell(spec: GridSpec) -> list[Point]:
    radii = np.geomspace(spec.r_min, spec.r_max, spec.radii_count) if spec.r_min > 0 else (
        np.linspace(spec.r_min, spec.r_max, spec.radii_count + 1)[1:]
    )
    phis = np.linspace(0.0, spec.phi_max, spec.count)
    thetas = [2.0 * math.pi * k / spec.angles for k in range(spec.angles)]
    points: list[Point] = []
    for r in radii:
        for phi in phis:
            signs = (1.0,) if phi == 0.0 else (1.0, -1.0)
            for sign in signs:
                for theta in thetas:
                    p = shell_point(float(r), float(phi), theta, sign)
                    if p.s >= spec.min_s and float(r) >= spec.min_r:
                        points.append(p)
    return points


def _rejection(spec: GridSpec, *, filter_radius: bool) -> list[Point]:
    rng = np.random.default_rng(spec.seed)
    half = spec.r_max
    points: list[Point] = []
    for _ in range(MAX_REJECTION_ROUNDS):
        batch = rng.uniform(
            low=(-half, -half, -half * half),
            high=(half, half, half * half),
            size=(4 * spec.count, 3),
        )
        for x1, x2, t in batch:
            p = Point(x1, x2, t)
            if p.s < spec.min_s:
                continue
            r = ccdist.cc_distance(p)
            if r < spec.min_r:
                continue
            if filter_radius and not spec.r_min <= r <= spec.r_max:
                continue
            points.append(p)
            if len(points) == spec.count:
                return points
    raise RuntimeError(
        f"Rejection sampling collected {len(points)} of {spec.count} points; widen the grid"
    )


def grid_points(spec: GridSpec) -> list[Point]:
    """Materialise ``spec`` into an ordered list of points."""

    if spec.kind == "shell":
        return _shell(spec)
    return _rejection(spec, filter_radius=spec.kind == "ball")


def cc_ball_sample(radius: float, count: int, seed: int, *, min_s: float = 0.0) -> list[Point]:
    """Seeded sample of the closed CC ball ``B(radius)``."""

    return grid_points(
        GridSpec(kind="ball", r_min=0.0, r_max=radius, count=count, seed=seed, min_s=min_s)
    )


def random_points(count: int, seed: int, bound: float = 10.0) -> list[Point]:
    """Uniform points in the cube ``[−bound, bound]³``."""

    rng = np.random.default_rng(seed)
    return [Point(*row) for row in rng.uniform(-bound, bound, size=(count, 3))]


def dilate_points(points: list[Point], lam: float) -> list[Point]:
    return [dilate(p, lam) for p in points]


def resolve_points(grid: GridSpec | Sequence[Point]) -> list[Point]:
    """Accept either a :class:`GridSpec` or an explicit point sequence."""

    if isinstance(grid, GridSpec):
        return grid_points(grid)
    return list(grid)
