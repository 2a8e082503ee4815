"""Closed-form Carnot–Carathéodory distance from the origin on H¹.

For a point with ``s = ‖x‖ > 0`` the parameter ``φ ∈ [0, π)`` solves
``μ(φ) s² = |t|`` with ``μ(φ) = (φ − sinφ cosφ) / sin²φ`` and the distance is
``r = g(φ) s`` with ``g(φ) = φ / sinφ``.  Equivalently ``r² = ν(φ)(|t| + s²)``
with ``ν(z) = z² / (z + sin²z − sinz cosz)``.  On the ``t``-axis ``r = √(π|t|)``.

All 0/0 expressions near ``φ = 0`` are evaluated through Taylor series below
``SERIES_CUTOFF``, and the kernels ``φ − sinφ cosφ`` and ``sinφ − φ cosφ`` use
their own power series for arguments below one.  When ``|t|/s² > π/2`` the root
is solved in the complement ``δ = π − φ`` so that ``sinφ = sin δ`` keeps full
relative precision next to the axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import optimize

from heislab.hgroup import Point, group_inv, group_mul

SERIES_CUTOFF = 1e-3
KERNEL_SERIES_CUTOFF = 1.0
AXIS_RATIO = 1e-12
MAX_ITERATIONS = 200
RESIDUAL_TOLERANCE = 1e-12
AGREEMENT_TOLERANCE = 1e-10
ASYMPTOTIC_RATIO = 1e4


class DegenerateInputError(ValueError):
    """Raised for ``(s, t) = (0, 0)`` where ``φ`` is undefined."""


class AxisError(ValueError):
    """Raised when an off-axis formula is requested on the ``t``-axis."""


class ConvergenceError(RuntimeError):
    """Root solve or closed-form agreement failure, with diagnostics."""

    def __init__(self, message: str, *, s: float, t: float, iterations: int, residual: float):
        super().__init__(
            f"{message} (s={s!r}, t={t!r}, iterations={iterations}, residual={residual!r})"
        )
        self.s = s
        self.t = t
        self.iterations = iterations
        self.residual = residual


# --- kernels ---------------------------------------------------------------------------------


def _x_minus_sin(x: float) -> float:
    """``x − sin x`` without cancellation."""

    if abs(x) >= KERNEL_SERIES_CUTOFF:
        return x - math.sin(x)
    term = x**3 / 6.0
    total = 0.0
    k = 1
    while True:
        total += term
        term *= -x * x / ((2 * k + 2) * (2 * k + 3))
        k += 1
        if abs(term) <= 1e-18 * abs(total):
            return total + term


def phi_minus_sincos(phi: float) -> float:
    """``φ − sinφ cosφ = (2φ − sin 2φ) / 2``."""

    return 0.5 * _x_minus_sin(2.0 * phi)


def sin_minus_phicos(phi: float) -> float:
    """``sinφ − φ cosφ = Σ (−1)^(k+1) 2k φ^(2k+1) / (2k+1)!``."""

    if abs(phi) >= KERNEL_SERIES_CUTOFF:
        return math.sin(phi) - phi * math.cos(phi)
    total = 0.0
    power = phi**3
    factorial = 6.0
    k = 1
    while True:
        term = (-1) ** (k + 1) * 2 * k * power / factorial
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
        power *= phi * phi
        factorial *= (2 * k + 2) * (2 * k + 3)
        k += 1


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi < math.pi:
        raise ValueError(f"phi must lie in [0, π), got {phi!r}")


def mu(phi: float) -> float:
    """``μ(φ) = (φ − sinφ cosφ) / sin²φ``, with ``μ(0) = 0``.

    Raises
    ------
    ValueError
        If ``phi`` lies outside ``[0, π)``.
    """

    _check_phi(phi)
    if phi < SERIES_CUTOFF:
        p2 = phi * phi
        return phi * (2.0 / 3.0 + p2 * (4.0 / 45.0 + p2 * 4.0 / 315.0))
    sin_phi = math.sin(phi)
    return phi_minus_sincos(phi) / (sin_phi * sin_phi)


def mu_prime(phi: float) -> float:
    """``μ′(φ) = 2 (sinφ − φ cosφ) / sin³φ``."""

    _check_phi(phi)
    if phi < SERIES_CUTOFF:
        p2 = phi * phi
        return 2.0 / 3.0 + p2 * (4.0 / 15.0 + p2 * 4.0 / 63.0)
    sin_phi = math.sin(phi)
    return 2.0 * sin_minus_phicos(phi) / sin_phi**3


def g(phi: float) -> float:
    """``g(φ) = φ / sinφ``, with ``g(0) = 1``."""

    _check_phi(phi)
    if phi < SERIES_CUTOFF:
        p2 = phi * phi
        return 1.0 + p2 * (1.0 / 6.0 + p2 * (7.0 / 360.0 + p2 * 31.0 / 15120.0))
    return phi / math.sin(phi)


def g_prime(phi: float) -> float:
    """``g′(φ) = (sinφ − φ cosφ) / sin²φ``."""

    _check_phi(phi)
    if phi < SERIES_CUTOFF:
        p2 = phi * phi
        return phi * (1.0 / 3.0 + p2 * (7.0 / 90.0 + p2 * 31.0 / 2520.0))
    sin_phi = math.sin(phi)
    return sin_minus_phicos(phi) / (sin_phi * sin_phi)


def nu(z: float) -> float:
    """``ν(z) = z² / (z + sin²z − sinz cosz)`` on ``[0, π]``.

    The continuous limit ``ν(0) = 1`` is used at the origin of the interval.

    Raises
    ------
    ValueError
        If ``z`` lies outside ``[0, π]``.
    """

    if not 0.0 <= z <= math.pi:
        raise ValueError(f"z must lie in [0, π], got {z!r}")
    if z < SERIES_CUTOFF:
        z2 = z * z
        series = 1.0 + z * (2.0 / 3.0) - z2 / 3.0 - z2 * z * (2.0 / 15.0) + z2 * z2 * (2.0 / 45.0)
        return 1.0 / series
    sin_z = math.sin(z)
    return z * z / (phi_minus_sincos(z) + sin_z * sin_z)


# --- root solve --------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PhiSolution:
    """Solved parameter ``φ`` for ``(s, t)`` and the resulting distance."""

    phi: float
    u: float
    s: float
    t: float
    r: float
    residual: float
    iterations: int
    sin_phi: float
    """``sinφ`` carried at full relative precision (also near ``φ = π``)."""
    cos_phi: float
    approximate: bool = False
    """``True`` when the axis limit replaced the root solve for tiny ``s``."""

    @property
    def sin_minus_phicos(self) -> float:
        if self.phi < KERNEL_SERIES_CUTOFF:
            return sin_minus_phicos(self.phi)
        return self.sin_phi - self.phi * self.cos_phi


def _mu_complement(delta: float) -> float:
    """``μ(π − δ) = (π − δ + sinδ cosδ) / sin²δ``."""

    sin_d = math.sin(delta)
    return (math.pi - delta + sin_d * math.cos(delta)) / (sin_d * sin_d)


def _mu_complement_prime(delta: float) -> float:
    sin_d = math.sin(delta)
    return -2.0 * (sin_d + (math.pi - delta) * math.cos(delta)) / sin_d**3


def _bracketed_root(func, dfunc, lo: float, hi: float, *, s: float, t: float) -> tuple[float, int]:
    coarse = optimize.root_scalar(
        func, bracket=(lo, hi), method="bisect", xtol=1e-300, rtol=1e-10, maxiter=MAX_ITERATIONS
    )
    if not coarse.converged:
        raise ConvergenceError(
            "Bisection did not converge",
            s=s,
            t=t,
            iterations=coarse.iterations,
            residual=float(func(coarse.root)),
        )
    root = coarse.root
    iterations = coarse.iterations
    # Newton polish, kept inside the bracket.
    for _ in range(MAX_ITERATIONS - iterations):
        slope = dfunc(root)
        if slope == 0.0:
            break
        step = func(root) / slope
        candidate = min(max(root - step, lo), hi)
        iterations += 1
        if abs(candidate - root) <= 4.0 * math.ulp(root):
            root = candidate
            break
        root = candidate
    return root, iterations


def solve_phi(s: float, t: float) -> PhiSolution:
    """Solve ``μ(φ) s² = |t|`` for ``φ ∈ [0, π)``.

    Bisection on the monotone ``μ`` followed by a Newton polish.  When
    ``u = |t| / s²`` exceeds ``π/2`` the solve runs in ``δ = π − φ`` with the
    asymptotic seed ``sin δ ≈ √(π / u)``.

    Parameters
    ----------
    s
        Horizontal norm ``‖x‖ ≥ 0``.
    t
        Vertical coordinate.

    Returns
    -------
    PhiSolution
        Root, residual ``|μ(φ) s² − |t||`` and distance ``r``.

    Raises
    ------
    DegenerateInputError
        For ``(s, t) = (0, 0)``.
    ConvergenceError
        If the residual bound ``1e-12 · max(1, |t|)`` is not met.
    """

    if s < 0:
        raise ValueError(f"s must be nonnegative, got {s!r}")
    abs_t = abs(t)
    if s == 0.0 and abs_t == 0.0:
        raise DegenerateInputError("φ is undefined at the origin")
    if abs_t == 0.0:
        return PhiSolution(
            phi=0.0, u=0.0, s=s, t=t, r=s, residual=0.0, iterations=0, sin_phi=0.0, cos_phi=1.0
        )
    if s <= AXIS_RATIO * math.sqrt(abs_t):
        return PhiSolution(
            phi=math.pi,
            u=math.inf,
            s=s,
            t=t,
            r=math.sqrt(math.pi * abs_t),
            residual=0.0,
            iterations=0,
            sin_phi=0.0,
            cos_phi=-1.0,
            approximate=s > 0.0,
        )

    u = abs_t / (s * s)
    if u <= math.pi / 2:
        root, iterations = _bracketed_root(
            lambda phi: mu(phi) - u, mu_prime, 0.0, math.pi / 2, s=s, t=t
        )
        phi = root
        sin_phi, cos_phi = math.sin(phi), math.cos(phi)
        residual = abs(mu(phi) * s * s - abs_t)
        r = g(phi) * s
    else:
        seed = math.sqrt(math.pi / u) if u > ASYMPTOTIC_RATIO else 1.0
        lo = 0.5 * min(seed, 1.0)
        while _mu_complement(lo) <= u:
            lo *= 0.5
        delta, iterations = _bracketed_root(
            lambda d: _mu_complement(d) - u, _mu_complement_prime, lo, math.pi / 2, s=s, t=t
        )
        phi = math.pi - delta
        sin_phi, cos_phi = math.sin(delta), -math.cos(delta)
        residual = abs(_mu_complement(delta) * s * s - abs_t)
        r = phi / sin_phi * s

    if residual > RESIDUAL_TOLERANCE * max(1.0, abs_t):
        raise ConvergenceError(
            "Residual bound not met", s=s, t=t, iterations=iterations, residual=residual
        )
    return PhiSolution(
        phi=phi,
        u=u,
        s=s,
        t=t,
        r=r,
        residual=residual,
        iterations=iterations,
        sin_phi=sin_phi,
        cos_phi=cos_phi,
    )


# --- distance ------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DistanceEvaluation:
    """Both closed forms of ``r`` at a point and their agreement gap."""

    point: Point
    r: float
    r_nu: float
    gap: float
    solution: PhiSolution | None

    @property
    def phi(self) -> float:
        return 0.0 if self.solution is None else self.solution.phi


def _nu_of_solution(sol: PhiSolution) -> float:
    if sol.phi < math.pi / 2:
        return nu(sol.phi)
    # sin/cos from the complement keep the denominator accurate next to π.
    return sol.phi**2 / (sol.phi - sol.sin_phi * sol.cos_phi + sol.sin_phi**2)


def evaluate_distance(p: Point) -> DistanceEvaluation:
    """Compute ``r = g(φ) s`` and ``√(ν(φ)(|t| + s²))`` and check they agree.

    Raises
    ------
    ConvergenceError
        If the two forms differ by more than ``1e-10 · r``.
    """

    s = p.s
    if s == 0.0 and p.t == 0.0:
        return DistanceEvaluation(point=p, r=0.0, r_nu=0.0, gap=0.0, solution=None)
    sol = solve_phi(s, p.t)
    r_nu = math.sqrt(_nu_of_solution(sol) * (abs(p.t) + s * s))
    gap = abs(sol.r - r_nu)
    if gap > AGREEMENT_TOLERANCE * sol.r:
        raise ConvergenceError(
            "Closed forms disagree", s=s, t=p.t, iterations=sol.iterations, residual=gap
        )
    return DistanceEvaluation(point=p, r=sol.r, r_nu=r_nu, gap=gap, solution=sol)


def cc_distance(p: Point) -> float:
    """Carnot–Carathéodory distance from the origin to ``p``."""

    return evaluate_distance(p).r


def cc_distance_between(p: Point, q: Point) -> float:
    """Distance between two points via left-invariance: ``r(q⁻¹ ∘ p)``."""

    return cc_distance(group_mul(group_inv(q), p))


@dataclass(frozen=True, slots=True)
class DistanceDerivatives:
    """Analytic ``t``-derivatives of ``r``; ``r0 = T r`` and ``r00 = T² r``."""

    r: float
    r_t: float
    r_tt: float
    r0: float
    r00: float
    phi: float
    sin_phi: float
    cos_phi: float


def distance_derivatives(p: Point) -> DistanceDerivatives:
    """Exact ``∂r/∂t`` and ``∂²r/∂t²`` off the axis.

    ``∂r/∂t = sgn(t) g′(φ) / (μ′(φ) s) = sgn(t) sinφ / (2 s)`` and
    ``∂²r/∂t² = sin³φ cosφ / (4 s³ (sinφ − φ cosφ))``.

    Raises
    ------
    AxisError
        If ``s = 0``.
    """

    s = p.s
    if s == 0.0:
        raise AxisError(f"t-derivatives of r are not defined on the axis (point {p})")
    sol = solve_phi(s, p.t)
    sign = math.copysign(1.0, p.t) if p.t != 0.0 else 0.0
    r_t = sign * sol.sin_phi / (2.0 * s)
    if sol.phi < SERIES_CUTOFF:
        p2 = sol.phi * sol.phi
        # sin³φ cosφ / (sinφ − φ cosφ) = 3 − 27φ²/10 + O(φ⁴)
        ratio = 3.0 - 2.7 * p2
    else:
        ratio = sol.sin_phi**3 * sol.cos_phi / sol.sin_minus_phicos
    r_tt = ratio / (4.0 * s**3)
    return DistanceDerivatives(
        r=sol.r, r_t=r_t, r_tt=r_tt, r0=2.0 * r_t,
        r00=4.0 * r_tt,
        phi=sol.phi,
        sin_phi=sol.sin_phi,
        cos_phi=sol.cos_phi,
    )


def horizontal_gradient(p: Point) -> tuple[float, float]:
    """``(X1 r, X2 r)`` off the axis; its frame norm is identically one.

    ``X1 r = cosφ x1/s + 2 x2 r_t`` and ``X2 r = cosφ x2/s − 2 x1 r_t``.
    """

    derivs = distance_derivatives(p)
    s = p.s
    cos_phi = derivs.cos_phi
    return (
        cos_phi * p.x1 / s + 2.0 * p.x2 * derivs.r_t,
        cos_phi * p.x2 / s - 2.0 * p.x1 * derivs.r_t,
    )
