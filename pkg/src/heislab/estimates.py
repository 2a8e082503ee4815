"""Cutoff functions, the gradient-ratio quantity and the subgradient-estimate harness."""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from heislab import ccdist
from heislab.bochner import PositivityError
from heislab.hgroup import EvaluationError, Point, ScalarField
from heislab.report import VerificationReport
from heislab.sampling import GridSpec, resolve_points
from heislab.sublap import hgrad_sq, sublap

CERTIFIED_C = math.pi**2
CERTIFICATE_SAMPLES = 10_000
PHARM_TOLERANCE = 1e-8
NUMERIC_PHARM_TOLERANCE = 1e-5
DEFAULT_ESTIMATE_GRID = GridSpec(kind="ball", r_min=0.0, r_max=2.0, count=200, seed=0)


class PreconditionError(ValueError):
    """A harness precondition (positivity, pseudoharmonicity) failed at ``point``."""

    def __init__(self, message: str, point: Point | None = None) -> None:
        super().__init__(message)
        self.point = point


# --- cutoff --------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CutoffCertificate:
    """Worst sampled ratios ``|η′| R / η^½`` and ``|η″| R²`` against ``certified_C``."""

    R: float
    samples: int
    first_ratio: float
    second_ratio: float
    monotone: bool
    certified_C: float

    @property
    def ok(self) -> bool:
        return (
            self.monotone
            and self.first_ratio <= self.certified_C
            and self.second_ratio <= self.certified_C
        )


@dataclass(frozen=True, slots=True)
class CutoffFunction:
    """``η(r) = 1`` on ``[0, R]``, ``cos²(π(r − R)/(2R))`` on ``[R, 2R]``, ``0`` beyond."""

    R: float
    certified_C: float = CERTIFIED_C

    def _theta(self, r: np.ndarray) -> np.ndarray:
        return math.pi * (np.clip(r, self.R, 2.0 * self.R) - self.R) / (2.0 * self.R)

    def profile(self, r: np.ndarray | float) -> np.ndarray | float:
        r = np.asarray(r, dtype=float)
        value = np.cos(self._theta(r)) ** 2
        value = np.where(r >= 2.0 * self.R, 0.0, value)
        return float(value) if value.ndim == 0 else value

    def __call__(self, r: float) -> float:
        return float(self.profile(r))

    def derivative(self, r: np.ndarray | float) -> np.ndarray | float:
        """``η′ = −(π/R) cosθ sinθ`` inside the transition band."""

        r = np.asarray(r, dtype=float)
        theta = self._theta(r)
        value = -(math.pi / self.R) * np.cos(theta) * np.sin(theta)
        value = np.where((r > self.R) & (r < 2.0 * self.R), value, 0.0)
        return float(value) if value.ndim == 0 else value

    def second_derivative(self, r: np.ndarray | float) -> np.ndarray | float:
        """``η″ = −(π²/(2R²)) cos 2θ`` inside the transition band."""

        r = np.asarray(r, dtype=float)
        theta = self._theta(r)
        value = -(math.pi**2 / (2.0 * self.R**2)) * np.cos(2.0 * theta)
        value = np.where((r > self.R) & (r < 2.0 * self.R), value, 0.0)
        return float(value) if value.ndim == 0 else value

    def certify(self, samples: int = CERTIFICATE_SAMPLES) -> CutoffCertificate:
        """Check ``−(C/R) η^½ ≤ η′ ≤ 0`` and ``|η″| ≤ C/R²`` on ``samples`` radii in ``[0, 3R]``."""

        r = np.linspace(0.0, 3.0 * self.R, samples)
        eta = np.asarray(self.profile(r))
        d1 = np.asarray(self.derivative(r))
        d2 = np.asarray(self.second_derivative(r))
        root = np.sqrt(eta)
        # Where η vanishes so does η′ (η′ = −(π/R) η^½ sinθ).
        with np.errstate(divide="ignore", invalid="ignore"):
            first = np.where(root > 0, np.abs(d1) * self.R / root, 0.0)
        return CutoffCertificate(
            R=self.R,
            samples=samples,
            first_ratio=float(first.max()),
            second_ratio=float(np.abs(d2).max() * self.R**2),
            monotone=bool(np.all(np.diff(eta) <= 0.0) and np.all(d1 <= 0.0)),
            certified_C=self.certified_C,
        )


def build_cutoff(R: float) -> CutoffFunction:
    if not R > 0 or not math.isfinite(R):
        raise ValueError(f"R must be positive, got {R}")
    return CutoffFunction(R=float(R))


# --- bounds --------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EstimateParams:
    """Constants of the subgradient estimate; ``k = k1 = 0`` on H¹."""

    n: int = 1
    k: float = 0.0
    k1: float = 0.0
    b: float = 1.0
    C2: float = 1.0
    R: float = 1.0

    def __post_init__(self) -> None:
        if self.n != 1:
            raise ValueError("Only n = 1 is supported")
        if self.k < 0 or self.k1 < 0:
            raise ValueError("k and k1 must be nonnegative")
        for name in ("b", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.C2 < 0:
            raise ValueError(f"C2 must be nonnegative, got {self.C2}")

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def _leading_factor(params: EstimateParams) -> float:
    shift = 5.0 + 2.0 * params.b * params.k
    return (params.n + shift) ** 2 / shift


def estimate_bound(params: EstimateParams) -> float:
    """``((n+5+2bk)² / (5+2bk)) · (k + 2/b + C2/R)``."""

    return _leading_factor(params) * (params.k + 2.0 / params.b + params.C2 / params.R)


def weak_bound(params: EstimateParams, C3: float) -> float:
    """Torsion-aware form ``((n+5)²/5) · (k + n(1+b) k1 + 2/b + C3/R)``."""

    n = params.n
    return ((n + 5) ** 2 / 5.0) * (
        params.k + n * (1.0 + params.b) * params.k1 + 2.0 / params.b + C3 / params.R
    )


def _t_derivative(u: ScalarField, p: Point) -> float:
    return 2.0 * u.partial((0, 0, 1), p)


def gradient_ratio(u: ScalarField, p: Point, b: float) -> float:
    """``|∇_b u|²/u² + b (T u)²/u²`` under the half norm.

    Raises
    ------
    PositivityError
        If ``u(p) ≤ 0``.
    """

    value = u(p)
    if value <= 0:
        raise PositivityError(p, value, u.label)
    u0 = _t_derivative(u, p)
    return (hgrad_sq(u, p) + b * u0 * u0) / (value * value)


@dataclass(frozen=True, slots=True)
class EstimateReport:
    """Sup of the gradient ratio over ``B(R)`` against the estimate bound."""

    sup_ratio: float
    bound: float
    argmax_point: Point
    margin: float
    grid_size: int
    params: EstimateParams
    weak: float = math.nan

    @property
    def passed(self) -> bool:
        return self.sup_ratio < self.bound


def ball_grid(R: float, grid: GridSpec | None = None) -> GridSpec:
    """CC-ball sample of ``B(2R)`` keeping the count and seed of ``grid``."""

    base = grid or DEFAULT_ESTIMATE_GRID
    return replace(base, kind="ball", r_min=0.0, r_max=2.0 * R)


def _pharm_ratio(u: ScalarField, points: Sequence[Point]) -> tuple[float, Point]:
    sup_lap = 0.0
    sup_u = 0.0
    worst = points[0]
    for p in points:
        lap = abs(sublap(u, p))
        if lap > sup_lap:
            sup_lap, worst = lap, p
        sup_u = max(sup_u, abs(u(p)))
    return (sup_lap / sup_u if sup_u > 0 else sup_lap), worst


def check_preconditions(
    u: ScalarField,
    points: Sequence[Point],
    *,
    pharm_tolerance: float | None = None,
) -> None:
    """Positivity and ``Δ_b u ≈ 0`` on ``points``.

    Raises
    ------
    PreconditionError
        Naming the first nonpositive point or the worst pseudoharmonic residual.
    """

    if not points:
        raise PreconditionError("Empty sample")
    for p in points:
        try:
            value = u(p)
        except EvaluationError as exc:
            raise PreconditionError(f"{u.label} is singular at {p}", p) from exc
        if value <= 0:
            raise PreconditionError(f"{u.label} is not positive at {p} (value {value!r})", p)
    if pharm_tolerance is None:
        pharm_tolerance = PHARM_TOLERANCE if u.has_partials else NUMERIC_PHARM_TOLERANCE
    ratio, worst = _pharm_ratio(u, points)
    if ratio > pharm_tolerance:
        raise PreconditionError(
            f"{u.label} is not pseudoharmonic: sup|Δ_b u|/sup|u| = {ratio:.3e} "
            f"(worst at {worst})",
            worst,
        )


def verify_gradient_estimate(
    u: ScalarField,
    params: EstimateParams,
    grid: GridSpec | Sequence[Point] | None = None,
    *,
    C3: float | None = None,
    pharm_tolerance: float | None = None,
) -> EstimateReport:
    """Sup of :func:`gradient_ratio` over ``B(R)`` against :func:`estimate_bound`.

    Parameters
    ----------
    u
        Field assumed positive and pseudoharmonic on ``B(2R)``.
    params
        Estimate constants; ``params.R`` is the ball radius.
    grid
        Sample specification (radius overridden to ``2R``) or explicit points of ``B(2R)``.
    C3
        Constant for :func:`weak_bound`; defaults to ``params.C2``.

    Returns
    -------
    EstimateReport
        ``passed`` iff ``sup_ratio < bound``.

    Raises
    ------
    PreconditionError
        If ``u`` is not positive or not pseudoharmonic on the sample.
    """

    if grid is None or isinstance(grid, GridSpec):
        points = resolve_points(ball_grid(params.R, grid))
    else:
        points = list(grid)
    check_preconditions(u, points, pharm_tolerance=pharm_tolerance)
    inner = [p for p in points if ccdist.cc_distance(p) <= params.R]
    if not inner:
        raise PreconditionError(f"No sample point lies in B({params.R})")
    sup_ratio = -math.inf
    argmax = inner[0]
    for p in inner:
        ratio = gradient_ratio(u, p, params.b)
        if ratio > sup_ratio:
            sup_ratio, argmax = ratio, p
    bound = estimate_bound(params)
    return EstimateReport(
        sup_ratio=sup_ratio,
        bound=bound,
        argmax_point=argmax,
        margin=bound - sup_ratio,
        grid_size=len(inner),
        params=params,
        weak=weak_bound(params, params.C2 if C3 is None else C3),
    )


def calibrate_C2(
    u: ScalarField,
    b: float,
    R_list: Sequence[float],
    grid: GridSpec | None = None,
    *,
    k: float = 0.0,
) -> float:
    """Smallest ``C2 ≥ 0`` with ``sup_ratio ≤ bound`` at every radius in ``R_list``.

    The bound is affine in ``C2``, so each radius gives ``C2 ≥ R (sup/c − k − 2/b)``
    with ``c`` the leading factor; the result is the largest of these, clipped at
    zero, or ``inf`` when some sup is not finite.
    """

    if not R_list:
        raise ValueError("R_list must not be empty")
    required = 0.0
    for R in R_list:
        params = EstimateParams(k=k, b=b, C2=0.0, R=R)
        result = verify_gradient_estimate(u, params, ball_grid(R, grid))
        if not math.isfinite(result.sup_ratio):
            return math.inf
        factor = _leading_factor(params)
        required = max(required, R * (result.sup_ratio / factor - k - 2.0 / b))
    return required


def aux_functional(u: ScalarField, p: Point, t_param: float, R: float, b: float) -> float:
    """``t (|∇_b f|² + b t η f0²)`` with ``f = ln u`` and ``η`` the cutoff of radius ``R``.

    Raises
    ------
    PositivityError
        If ``u(p) ≤ 0``.
    """

    if not 0.0 <= t_param <= 1.0:
        raise ValueError(f"t_param must lie in [0, 1], got {t_param}")
    value = u(p)
    if value <= 0:
        raise PositivityError(p, value, u.label)
    grad_f = hgrad_sq(u, p) / (value * value)
    f0 = _t_derivative(u, p) / value
    eta = build_cutoff(R)(ccdist.cc_distance(p))
    return t_param * (grad_f + b * t_param * eta * f0 * f0)


def sphere_probes(R: float) -> list[Point]:
    """Horizontal and axis points of the CC sphere of radius ``R``."""

    t_axis = R * R / math.pi
    return [
        Point(R, 0.0, 0.0),
        Point(-R, 0.0, 0.0),
        Point(0.0, R, 0.0),
        Point(0.0, -R, 0.0),
        Point(0.0, 0.0, t_axis),
        Point(0.0, 0.0, -t_axis),
    ]


def _first_nonpositive(u: ScalarField, points: Sequence[Point]) -> tuple[Point, str] | None:
    for p in points:
        try:
            value = u(p)
        except EvaluationError:
            return p, "singular"
        if value <= 0:
            return p, f"u = {value:.6g}"
    return None


def liouville_probe(
    u: ScalarField,
    radii: Sequence[float],
    b: float,
    grid: GridSpec | None = None,
    *,
    C2: float = 1.0,
) -> VerificationReport:
    """Trend of ``sup_{B(R)}`` of the gradient ratio as ``R`` grows.

    One entry per radius (value = sup ratio, bound = estimate bound); radii where
    ``u`` fails to be positive on the sample, on the sphere probes or at the origin
    are recorded as failed entries with the offending point.  A final diagnostic
    entry states whether the sups are non-increasing.
    """

    report = VerificationReport(
        suite="liouville",
        config_echo={
            "field": u.label,
            "radii": list(radii),
            "b": b,
            "C2": C2,
            "grid": (grid or DEFAULT_ESTIMATE_GRID).as_dict(),
        },
    )
    sups: list[float] = []
    for R in radii:
        name = f"sup ratio R={R:g}"
        points = resolve_points(replace(ball_grid(R, grid), r_max=float(R)))
        failure = _first_nonpositive(u, [Point(0.0, 0.0, 0.0), *sphere_probes(R), *points])
        params = EstimateParams(b=b, C2=C2, R=R)
        if failure is not None:
            point, detail = failure
            report.add(name, math.nan, estimate_bound(params), passed=False,
                       note=f"positivity fails at {point} ({detail})")
            continue
        sup = max(gradient_ratio(u, p, b) for p in points)
        sups.append(sup)
        report.add(name, sup, estimate_bound(params), note=f"{len(points)} points")
    trend = all(later <= earlier for earlier, later in itertools.pairwise(sups))
    report.add(
        "non-increasing trend",
        float(trend),
        1.0,
        passed=True,
        note="diagnostic over radii with positive samples",
    )
    return report
