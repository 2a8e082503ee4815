"""Sub-Laplacian comparison laboratory on H¹.

Three strands live here:

* the Riccati model ``y′ = −2y² + l/r² − k₂`` behind the comparison argument,
  integrated with a fixed-step classical Runge–Kutta scheme, and the
  ``m/r``, ``m√K cot(√K r)``, ``m√K coth(√K r)`` families that bound it;
* the measured comparison constant ``sup r·Δ_b r`` over a smooth-region grid;
* the sups of ``|r0|·r`` and ``|r00|·r³`` with finite-difference cross-checks
  of the analytic ``t``-derivatives of ``r``, plus the radial-identity
  diagnostic on the ``t = 0`` plane.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from heislab import ccdist
from heislab.hgroup import Point, finite_difference
from heislab.report import VerificationReport
from heislab.sampling import GridSpec, resolve_points
from heislab.sublap import sublap_r_cartesian, sublap_r_closed, sublap_r_numeric

FAMILY_KINDS = ("flat", "positive", "negative")
DEFAULT_STEPS = 10_000
MIN_STEPS = 100
BLOWUP_THRESHOLD = 1e12
DOMINATION_TOLERANCE = 1e-8
DEFAULT_R_START = 0.1
DEFAULT_SPAN = 10.0
POSITIVE_FRACTION = 0.5
POSITIVE_M = 0.5
NEGATIVE_M = 1.0
DERIVATIVE_TOLERANCE = 1e-6
REFINEMENT_TOLERANCE = 0.05
RADIAL_STEP = 1e-3
T_STEP_FIRST = float(np.finfo(float).eps) ** (1.0 / 3.0)
T_STEP_SECOND = float(np.finfo(float).eps) ** (1.0 / 4.0)

DEFAULT_CONSTANT_GRID = GridSpec(
    kind="shell", r_min=0.5, r_max=5.0, count=40, phi_max=3.0, radii_count=4, min_s=0.06
)
DEFAULT_L31_GRID = GridSpec(
    kind="shell", r_min=0.5, r_max=50.0, count=30, phi_max=2.8, radii_count=5, min_s=0.0
)


class ValidityRangeError(ValueError):
    """Raised when a radius range starts before the absorption step of the bound is valid."""

    def __init__(self, message: str, required_radius: float) -> None:
        super().__init__(message)
        self.required_radius = required_radius


@dataclass(frozen=True, slots=True)
class ComparisonParams:
    """Riccati-model parameters: Webster lower bound ``k2``, absorbed constant ``l``, deltas."""

    k2: float = 0.0
    l: float = 0.0  # noqa: E741
    delta1: float = 0.5
    delta2: float = 0.5

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.k2, self.l, self.delta1, self.delta2)):
            raise ValueError("Comparison parameters must be finite")
        if self.l < 0:
            raise ValueError(f"l must be nonnegative, got {self.l}")
        for name in ("delta1", "delta2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")

    @property
    def K2(self) -> float:
        return (1.0 - self.delta1) * self.k2

    @property
    def K3(self) -> float:
        return (1.0 + self.delta2) * abs(self.k2)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, slots=True)
class BoundFamily:
    """Closed-form upper bound ``m/r``, ``m√K cot(√K r)`` or ``m√K coth(√K r)``."""

    kind: str
    m: float
    K: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"Unknown family kind '{self.kind}'; expected one of {FAMILY_KINDS}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.kind == "flat":
            if self.K != 0.0:
                raise ValueError("The flat family carries no K")
        elif not self.K > 0:
            raise ValueError(f"K must be positive for the {self.kind} family, got {self.K}")

    @property
    def singular_radius(self) -> float:
        """First radius where the bound leaves its domain (``π/√K`` for cot)."""

        return math.pi / math.sqrt(self.K) if self.kind == "positive" else math.inf

    def base(self, r: np.ndarray | float) -> np.ndarray:
        """Bound with ``m = 1``."""

        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("Bounds are defined for r > 0")
        if self.kind == "flat":
            return 1.0 / r
        root = math.sqrt(self.K)
        if self.kind == "positive":
            if np.any(r >= self.singular_radius):
                raise ValueError(f"cot bound is defined on (0, {self.singular_radius:.6g})")
            return root / np.tan(root * r)
        return root / np.tanh(root * r)

    def bound(self, r: np.ndarray | float) -> np.ndarray | float:
        value = self.m * self.base(r)
        return float(value) if value.ndim == 0 else value

    def with_m(self, m: float) -> BoundFamily:
        return replace(self, m=m)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RiccatiTrajectory:
    """Sampled solution of ``y′ = −2y² + l/r² − k₂``; truncated at blow-up."""

    params: ComparisonParams
    radii: np.ndarray
    values: np.ndarray
    blowup_radius: float | None = None

    @property
    def blew_up(self) -> bool:
        return self.blowup_radius is not None

    @property
    def final(self) -> float:
        return float(self.values[-1])


def m1_of_l(l: float) -> float:  # noqa: E741
    """Positive root of ``2m² − m − l = 0``."""

    if l < 0 or not math.isfinite(l):
        raise ValueError(f"l must be finite and nonnegative, got {l}")
    return (1.0 + math.sqrt(1.0 + 8.0 * l)) / 4.0


def validity_radius(params: ComparisonParams) -> float:
    """Radius beyond which ``l/r²`` is absorbed by ``δ|k₂|``."""

    if params.k2 > 0:
        return math.sqrt(params.l / (params.delta1 * params.k2))
    if params.k2 < 0:
        return math.sqrt(params.l / (params.delta2 * abs(params.k2)))
    return 0.0


def theorem_family(params: ComparisonParams) -> BoundFamily:
    """Bound family for the sign of ``k₂``: ``m1(l)/r``, ``½√K cot`` or ``√K coth``."""

    if params.k2 > 0:
        return BoundFamily("positive", POSITIVE_M, params.K2)
    if params.k2 < 0:
        return BoundFamily("negative", NEGATIVE_M, params.K3)
    return BoundFamily("flat", m1_of_l(params.l))


def _check_consistent(params: ComparisonParams, family: BoundFamily) -> None:
    expected = "positive" if params.k2 > 0 else "negative" if params.k2 < 0 else "flat"
    if family.kind != expected:
        raise ValueError(
            f"Family '{family.kind}' does not match k2 = {params.k2} (expected '{expected}')"
        )


def validity_range(
    params: ComparisonParams,
    family: BoundFamily,
    *,
    r_start: float = DEFAULT_R_START,
    span: float = DEFAULT_SPAN,
) -> tuple[float, float]:
    """Radius interval on which domination by ``family`` is asserted.

    Starts at ``max(r_start, validity_radius)``; cot families stop halfway to
    their singular radius, the others extend by ``span``.

    Raises
    ------
    ValidityRangeError
        If a cot family has no admissible radii left.
    """

    _check_consistent(params, family)
    lo = max(r_start, validity_radius(params))
    if family.kind == "positive":
        singular = family.singular_radius
        if lo >= singular:
            raise ValidityRangeError(
                f"Validity radius {lo:.6g} lies beyond the cot singularity {singular:.6g}",
                required_radius=lo,
            )
        return lo, lo + POSITIVE_FRACTION * (singular - lo)
    return lo, lo + span


def _riccati_rhs(params: ComparisonParams) -> Callable[[float, float], float]:
    l, k2 = params.l, params.k2  # noqa: E741

    def rhs(r: float, y: float) -> float:
        return -2.0 * y * y + l / (r * r) - k2

    return rhs


def _rk4_step(f: Callable[[float, float], float], r: float, h: float, y: float) -> float:
    k1 = f(r, y)
    k2 = f(r + h / 2.0, y + h * k1 / 2.0)
    k3 = f(r + h / 2.0, y + h * k2 / 2.0)
    k4 = f(r + h, y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def riccati_integrate(
    params: ComparisonParams,
    y0: float,
    r0: float,
    r1: float,
    steps: int = DEFAULT_STEPS,
) -> RiccatiTrajectory:
    """Integrate ``y′ = −2y² + l/r² − k₂`` from ``(r0, y0)`` to ``r1``.

    Fixed-step classical fourth-order Runge–Kutta, so repeated runs are
    bit-identical.  Once ``|y|`` exceeds ``1e12`` (or stops being finite) the
    trajectory is truncated and the radius recorded in ``blowup_radius``.

    Parameters
    ----------
    params
        Model parameters.
    y0
        Initial value at ``r0``.
    r0, r1
        Integration interval, ``0 < r0 < r1``.
    steps
        Number of uniform steps (at least 100).

    Returns
    -------
    RiccatiTrajectory
        Radii and values, ``steps + 1`` samples unless blow-up truncated them.
    """

    if steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}, got {steps}")
    if not (math.isfinite(y0) and math.isfinite(r0) and math.isfinite(r1)):
        raise ValueError("Riccati inputs must be finite")
    if not 0.0 < r0 < r1:
        raise ValueError(f"Need 0 < r0 < r1, got r0={r0}, r1={r1}")
    rhs = _riccati_rhs(params)
    h = (r1 - r0) / steps
    radii = r0 + h * np.arange(steps + 1)
    values = np.empty(steps + 1)
    values[0] = y0
    y = y0
    for i in range(steps):
        y = _rk4_step(rhs, float(radii[i]), h, y)
        if not math.isfinite(y) or abs(y) > BLOWUP_THRESHOLD:
            return RiccatiTrajectory(
                params=params,
                radii=radii[: i + 1].copy(),
                values=values[: i + 1].copy(),
                blowup_radius=float(radii[i + 1]),
            )
        values[i + 1] = y
    return RiccatiTrajectory(params=params, radii=radii, values=values)


def domination_excess(trajectory: RiccatiTrajectory, family: BoundFamily) -> float:
    """``max (y − bound) / max(1, |bound|)`` over the trajectory."""

    bound = family.m * family.base(trajectory.radii)
    return float(np.max((trajectory.values - bound) / np.maximum(1.0, np.abs(bound))))


def dominates(
    trajectory: RiccatiTrajectory,
    family: BoundFamily,
    tolerance: float = DOMINATION_TOLERANCE,
) -> bool:
    return domination_excess(trajectory, family) <= tolerance


def minimal_dominating_m(trajectory: RiccatiTrajectory, family: BoundFamily) -> float:
    """Smallest ``m`` with ``y ≤ m·base`` wherever the unit-``m`` bound is positive."""

    base = family.base(trajectory.radii)
    mask = base > 0
    if not np.any(mask):
        return math.nan
    return float(np.max(trajectory.values[mask] / base[mask]))


def verify_comparison(
    params: ComparisonParams,
    family: BoundFamily,
    r_range: tuple[float, float] | None = None,
    steps: int = DEFAULT_STEPS,
    *,
    y0: float | None = None,
    tolerance: float = DOMINATION_TOLERANCE,
) -> VerificationReport:
    """Integrate the extremal trajectory and check it stays below ``family``.

    The trajectory starts on the bound at the left end of ``r_range`` unless
    ``y0`` is given.  Entries: relative domination excess and the minimal
    dominating ``m`` against the family's ``m``.

    Raises
    ------
    ValidityRangeError
        If ``r_range`` starts below the validity radius or reaches a cot singularity.
    ValueError
        If ``family`` does not match the sign of ``k2``.
    """

    _check_consistent(params, family)
    if r_range is None:
        r_range = validity_range(params, family)
    lo, hi = r_range
    required = validity_radius(params)
    if lo < required:
        raise ValidityRangeError(
            f"Range starts at {lo:.6g} but the bound needs r ≥ {required:.6g}",
            required_radius=required,
        )
    if hi >= family.singular_radius:
        raise ValidityRangeError(
            f"Range end {hi:.6g} reaches the cot singularity {family.singular_radius:.6g}",
            required_radius=required,
        )
    start = family.bound(lo) if y0 is None else y0
    trajectory = riccati_integrate(params, float(start), lo, hi, steps)
    label = f"{family.kind} m={family.m:.6g} K={family.K:.6g} k2={params.k2:g} l={params.l:g}"
    note = f"r ∈ [{lo:.6g}, {hi:.6g}], {steps} steps"
    if trajectory.blew_up:
        note += f"; blow-up at r = {trajectory.blowup_radius:.6g}"

    report = VerificationReport(suite="comparison", config_echo={
        "params": params.as_dict(),
        "family": family.as_dict(),
        "r_range": [lo, hi],
        "steps": steps,
    })
    report.add(f"domination [{label}]", domination_excess(trajectory, family), tolerance, note=note)
    minimal = minimal_dominating_m(trajectory, family)
    report.add(
        f"minimal m [{label}]",
        minimal,
        family.m,
        passed=bool(minimal <= family.m * (1.0 + tolerance)),
        note="sup y/base over radii with positive base",
    )
    return report


# --- measured constants ---------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonMeasurement:
    """``sup r·Δ_b r`` over a grid, with where it is attained."""

    sup: float
    argmax: Point
    argmax_phi: float
    values: tuple[float, ...]
    closed_form_sup: float
    profile_sup: float

    @property
    def count(self) -> int:
        return len(self.values)


def measure_comparison_constant(
    grid: GridSpec | Sequence[Point] = DEFAULT_CONSTANT_GRID,
) -> ComparisonMeasurement:
    """Measured ``C0 = sup r·Δ_b r`` from finite differences of the distance.

    ``closed_form_sup`` evaluates the Cartesian profile at the same ``φ`` values and
    ``profile_sup`` the displayed profile ``F``.

    Raises
    ------
    SingularRegionError
        If a grid point lies within the excluded neighbourhood of the axis or center.
    """

    points = resolve_points(grid)
    if not points:
        raise ValueError("Empty grid")
    values: list[float] = []
    best = -math.inf
    argmax = points[0]
    argmax_phi = 0.0
    closed = -math.inf
    profile = -math.inf
    for p in points:
        value = ccdist.cc_distance(p) * sublap_r_numeric(p)
        phi = ccdist.solve_phi(p.s, p.t).phi
        values.append(value)
        if value > best:
            best, argmax, argmax_phi = value, p, phi
        if phi > 0.0:
            closed = max(closed, sublap_r_cartesian(phi))
            profile = max(profile, sublap_r_closed(phi))
        else:
            closed = max(closed, 2.0)
            profile = max(profile, 1.5)
    return ComparisonMeasurement(
        sup=best,
        argmax=argmax,
        argmax_phi=argmax_phi,
        values=tuple(values),
        closed_form_sup=closed,
        profile_sup=profile,
    )


def _frame_derivative(func: Callable[[Point], float], p: Point, a: float, b: float) -> float:
    """``(a X1 + b X2) func`` by central differences."""

    d1 = finite_difference(func, (1, 0, 0), p)
    d2 = finite_difference(func, (0, 1, 0), p)
    dt = finite_difference(func, (0, 0, 1), p)
    return a * (d1 + 2.0 * p.x2 * dt) + b * (d2 - 2.0 * p.x1 * dt)


def _r0(p: Point) -> float:
    return ccdist.distance_derivatives(p).r0


def angular_r0_derivative(p: Point) -> tuple[float, float]:
    """``(e1 r0, e2 r0)`` with ``e2 = ∇_b r`` (frame norm) and ``e1 = (e2_2, −e2_1)``."""

    v1, v2 = ccdist.horizontal_gradient(p)
    return _frame_derivative(_r0, p, v2, -v1), _frame_derivative(_r0, p, v1, v2)


def measure_l(grid: GridSpec | Sequence[Point] = DEFAULT_CONSTANT_GRID) -> float:
    """``sup r²·(2 e1 r0 − 2 r0²)`` over the grid, clipped at zero."""

    points = resolve_points(grid)
    best = 0.0
    for p in points:
        derivs = ccdist.distance_derivatives(p)
        e1_r0, _ = angular_r0_derivative(p)
        best = max(best, derivs.r * derivs.r * (2.0 * e1_r0 - 2.0 * derivs.r0 * derivs.r0))
    return best


def _t_difference(p: Point, order: int) -> float:
    # Steps scale with s² so that r varies on the step's own scale.
    scale = max(p.s * p.s, abs(p.t))
    base = T_STEP_FIRST if order == 1 else T_STEP_SECOND
    h = ((p.t + scale * base) - p.t)

    def r_at(t: float) -> float:
        return ccdist.cc_distance(Point(p.x1, p.x2, t))

    if order == 1:
        return (r_at(p.t + h) - r_at(p.t - h)) / (2.0 * h)
    return (r_at(p.t + h) - 2.0 * r_at(p.t) + r_at(p.t - h)) / (h * h)


@dataclass(frozen=True, slots=True)
class DerivativeSups:
    """``sup |r0|·r``, ``sup |r00|·r³`` and the worst finite-difference errors."""

    r0_sup: float
    r00_sup: float
    r_t_error: float
    r_tt_error: float
    count: int


def derivative_sups(points: Sequence[Point]) -> DerivativeSups:
    """Sweep analytic ``t``-derivatives of ``r`` and cross-check them numerically.

    Errors are relative to ``max(|analytic|, natural scale)`` with natural scales
    ``1/s`` for ``r_t`` and ``1/s³`` for ``r_tt``.
    """

    r0_sup = r00_sup = r_t_error = r_tt_error = 0.0
    count = 0
    for p in points:
        if p.s == 0.0:
            continue
        derivs = ccdist.distance_derivatives(p)
        s = p.s
        r0_sup = max(r0_sup, abs(derivs.r0) * derivs.r)
        r00_sup = max(r00_sup, abs(derivs.r00) * derivs.r**3)
        fd_t = _t_difference(p, 1)
        fd_tt = _t_difference(p, 2)
        r_t_error = max(r_t_error, abs(fd_t - derivs.r_t) / max(abs(derivs.r_t), 1.0 / s))
        r_tt_error = max(
            r_tt_error, abs(fd_tt - derivs.r_tt) / max(abs(derivs.r_tt), 1.0 / s**3)
        )
        count += 1
    return DerivativeSups(r0_sup, r00_sup, r_t_error, r_tt_error, count)


def _ring(radius: float, count: int) -> list[Point]:
    angles = 2.0 * math.pi * np.arange(count) / count
    return [Point(radius * math.cos(a), radius * math.sin(a), 0.0) for a in angles]


def _refined(grid: GridSpec | Sequence[Point]) -> list[Point] | None:
    if isinstance(grid, GridSpec):
        return resolve_points(replace(grid, count=4 * grid.count))
    return None


def _relative_change(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify_l31_bounds(
    grid: GridSpec | Sequence[Point] = DEFAULT_L31_GRID,
    *,
    ring_radii: Sequence[float] = (0.5, 1.0, 5.0, 50.0),
    ring_count: int = 16,
    derivative_tolerance: float = DERIVATIVE_TOLERANCE,
    refinement_tolerance: float = REFINEMENT_TOLERANCE,
) -> VerificationReport:
    """Sups of ``|r0|·r`` and ``|r00|·r³``, derivative cross-checks and ``t = 0`` anchors.

    When ``grid`` is a :class:`GridSpec` the sups are recomputed on a ×4 refined
    lattice and their relative change is checked against 5%.

    Raises
    ------
    AxisError
        Never for grid points on the axis (they are skipped); only for explicit
        ``t = 0`` ring points with ``s = 0``.
    """

    points = resolve_points(grid)
    sups = derivative_sups(points)
    report = VerificationReport(
        suite="l31",
        config_echo={
            "grid": grid.as_dict() if isinstance(grid, GridSpec) else {"points": len(points)},
            "ring_radii": list(ring_radii),
            "ring_count": ring_count,
        },
    )
    report.add("sup |r0|·r", sups.r0_sup, math.inf, passed=math.isfinite(sups.r0_sup),
               note=f"{sups.count} off-axis points")
    report.add("sup |r00|·r³", sups.r00_sup, math.inf, passed=math.isfinite(sups.r00_sup),
               note=f"{sups.count} off-axis points")
    report.add("r_t vs finite differences", sups.r_t_error, derivative_tolerance)
    report.add("r_tt vs finite differences", sups.r_tt_error, derivative_tolerance)

    refined = _refined(grid)
    if refined is not None:
        fine = derivative_sups(refined)
        report.add("refinement change sup |r0|·r", _relative_change(sups.r0_sup, fine.r0_sup),
                   refinement_tolerance, note=f"{fine.count} refined points")
        report.add("refinement change sup |r00|·r³",
                   _relative_change(sups.r00_sup, fine.r00_sup), refinement_tolerance,
                   note=f"{fine.count} refined points")

    ring = [p for radius in ring_radii for p in _ring(radius, ring_count)]
    r0_on_plane = max(abs(ccdist.distance_derivatives(p).r0) for p in ring)
    report.add("max |r0| on t = 0", r0_on_plane, 0.0, note="exact zero by symmetry")
    mixed = 0.0
    for p in ring:
        _, e2_r0 = angular_r0_derivative(p)
        mixed = max(mixed, abs(e2_r0) * ccdist.cc_distance(p) ** 2)
    report.add("sup |e2 r0|·r² on t = 0", mixed, math.inf, passed=math.isfinite(mixed),
               note="finite differences of r0 along ∇_b r")
    return report


@dataclass(frozen=True, slots=True)
class RadialIdentityPoint:
    """Residuals of ``∂_s(Δ_b r) + 2(Δ_b r)² − 2 e1 r0 + 2 r0²`` at one ``t = 0`` point."""

    point: Point
    residual: float
    cartesian_residual: float
    profile_residual: float


def radial_identity_diagnostic(
    radii: Sequence[float] = (0.5, 1.0, 2.0, 5.0),
    count: int = 8,
) -> list[RadialIdentityPoint]:
    """Evaluate the radial identity on ``t = 0`` rings.

    ``residual`` uses finite differences of the distance throughout;
    ``cartesian_residual`` uses ``Δ_b r = 2/s`` and ``profile_residual`` the
    displayed profile ``Δ_b r = 3/(2s)``, both with the exact ``e1 r0 = 3/s²``.
    """

    results: list[RadialIdentityPoint] = []
    for radius in radii:
        for p in _ring(radius, count):
            s = p.s
            v1, v2 = p.x1 / s, p.x2 / s
            h = RADIAL_STEP * s
            lap = sublap_r_numeric(p)
            ahead = sublap_r_numeric(Point(p.x1 + h * v1, p.x2 + h * v2, 0.0))
            behind = sublap_r_numeric(Point(p.x1 - h * v1, p.x2 - h * v2, 0.0))
            ds_lap = (ahead - behind) / (2.0 * h)
            e1_r0, _ = angular_r0_derivative(p)
            r0 = ccdist.distance_derivatives(p).r0
            residual = ds_lap + 2.0 * lap * lap - 2.0 * e1_r0 + 2.0 * r0 * r0
            exact_e1 = 3.0 / (s * s)

            def closed(c: float) -> float:
                return -c / (s * s) + 2.0 * (c / s) ** 2 - 2.0 * exact_e1

            results.append(
                RadialIdentityPoint(
                    point=p,
                    residual=residual,
                    cartesian_residual=closed(2.0),
                    profile_residual=closed(1.5),
                )
            )
    return results
