"""Heisenberg group H¹ core: points, group law, left-invariant frame and scalar fields.

Coordinates are ``(x1, x2, t)`` with the group law

``(x, t) ∘ (y, s) = (x + y, t + s + 2 (x2 y1 − x1 y2))``

and the left-invariant frame ``X1 = ∂1 + 2 x2 ∂t``, ``X2 = ∂2 − 2 x1 ∂t``,
``T = 2 ∂t``.  Iterated derivatives follow the convention
``fe_i e_j = X_j (X_i f)`` so that ``fe1e2 − fe2e1 = 4 ∂t f = 2 f0``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import sympy

X1, X2, T = sympy.symbols("x1 x2 t", real=True)
COORDINATES = (X1, X2, T)

EPS = float(np.finfo(float).eps)
FIRST_ORDER_STEP = EPS ** (1.0 / 3.0)
SECOND_ORDER_STEP = EPS ** (1.0 / 4.0)

MultiIndex = tuple[int, int, int]

FIRST_ORDER = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
SECOND_ORDER = ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1))

PROVENANCES = ("polynomial", "closed-form", "numeric-only")


class EvaluationError(ValueError):
    """Raised when a scalar field produces NaN/Inf at a point."""

    def __init__(self, point: Point, label: str, value: float) -> None:
        super().__init__(f"Field '{label}' evaluated to {value!r} at {point}.")
        self.point = point
        self.label = label
        self.value = value


@dataclass(frozen=True, slots=True)
class Point:
    """A point ``(x1, x2, t)`` of H¹."""

    x1: float
    x2: float
    t: float

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "t"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"Point coordinate {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def s(self) -> float:
        """Horizontal norm ``‖x‖``."""

        return math.hypot(self.x1, self.x2)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.t)

    def __str__(self) -> str:
        return f"({self.x1!r}, {self.x2!r}, {self.t!r})"


ORIGIN = Point(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class StructureConstants:
    """Pseudohermitian curvature data; identically zero on H¹."""

    torsion_A11: complex = 0j
    curvature_W: float = 0.0
    ricci_lower_k: float = 0.0

    def __post_init__(self) -> None:
        if self.torsion_A11 != 0 or self.curvature_W != 0 or self.ricci_lower_k != 0:
            raise ValueError("H¹ is flat and torsion-free; structure constants must be zero")


HEISENBERG = StructureConstants()


def group_mul(p: Point, q: Point) -> Point:
    """Return the Heisenberg product ``p ∘ q``."""

    return Point(
        p.x1 + q.x1,
        p.x2 + q.x2,
        p.t + q.t + 2.0 * (p.x2 * q.x1 - p.x1 * q.x2),
    )


def group_inv(p: Point) -> Point:
    """Return ``p⁻¹ = (−x1, −x2, −t)``."""

    return Point(-p.x1, -p.x2, -p.t)


def dilate(p: Point, lam: float) -> Point:
    """Parabolic dilation ``(λ x1, λ x2, λ² t)``.

    Raises
    ------
    ValueError
        If ``lam`` is not strictly positive.
    """

    if not lam > 0:
        raise ValueError(f"Dilation factor must be positive, got {lam!r}")
    return Point(lam * p.x1, lam * p.x2, lam * lam * p.t)


# --- symbolic frame --------------------------------------------------------------------------


def frame_x1(expr: sympy.Expr) -> sympy.Expr:
    """Apply ``X1 = ∂1 + 2 x2 ∂t`` to a sympy expression."""

    return sympy.diff(expr, X1) + 2 * X2 * sympy.diff(expr, T)


def frame_x2(expr: sympy.Expr) -> sympy.Expr:
    """Apply ``X2 = ∂2 − 2 x1 ∂t`` to a sympy expression."""

    return sympy.diff(expr, X2) - 2 * X1 * sympy.diff(expr, T)


def frame_t(expr: sympy.Expr) -> sympy.Expr:
    """Apply ``T = 2 ∂t`` to a sympy expression."""

    return 2 * sympy.diff(expr, T)


def translate_expr(expr: sympy.Expr, p: Point) -> sympy.Expr:
    """Return the expression of ``q ↦ f(p ∘ q)``."""

    a1, a2, at = (sympy.Rational(v) for v in p.as_tuple())
    return expr.subs(
        {X1: a1 + X1, X2: a2 + X2, T: at + T + 2 * (a2 * X1 - a1 * X2)},
        simultaneous=True,
    )


# --- scalar fields ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """Evaluatable real field on H¹ with optional analytic partials.

    Fields built through :meth:`from_expr` carry a sympy expression; their partial
    derivatives of any order are lambdified on first use and cached.  Fields built
    through :meth:`numeric` fall back to central finite differences (orders ≤ 2).
    """

    label: str
    evaluate: Callable[..., Any]
    provenance: str = "numeric-only"
    expr: sympy.Expr | None = None
    _derivatives: dict[MultiIndex, Callable[..., Any]] = field(
        default_factory=dict, repr=False, compare=False
    )
    _companions: dict[str, ScalarField] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"Unknown field provenance '{self.provenance}'")
        if self.provenance != "numeric-only" and self.expr is None:
            raise ValueError("Analytic provenance requires a sympy expression")

    @classmethod
    def from_expr(
        cls, expr: sympy.Expr | str | float, label: str, provenance: str = "closed-form"
    ) -> ScalarField:
        """Build a field with analytic partials from a sympy expression in ``x1, x2, t``."""

        expression = sympy.sympify(expr, locals={"x1": X1, "x2": X2, "t": T})
        unknown = expression.free_symbols - set(COORDINATES)
        if unknown:
            names = ", ".join(sorted(str(sym) for sym in unknown))
            raise ValueError(f"Field '{label}' uses unknown symbols: {names}")
        function = sympy.lambdify(COORDINATES, expression, modules="numpy")
        return cls(label=label, evaluate=function, provenance=provenance, expr=expression)

    @classmethod
    def numeric(cls, function: Callable[[float, float, float], float], label: str) -> ScalarField:
        """Wrap a plain callable; derivatives come from finite differences."""

        return cls(label=label, evaluate=function, provenance="numeric-only")

    @property
    def has_partials(self) -> bool:
        return self.expr is not None

    def __call__(self, p: Point) -> float:
        try:
            value = float(self.evaluate(p.x1, p.x2, p.t))
        except (ZeroDivisionError, OverflowError) as exc:
            raise EvaluationError(p, self.label, math.inf) from exc
        if not math.isfinite(value):
            raise EvaluationError(p, self.label, value)
        return value

    def values(self, x1: np.ndarray, x2: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Vectorised evaluation over coordinate arrays."""

        shape = np.broadcast(x1, x2, t).shape
        if self.expr is None:
            return np.vectorize(lambda a, b, c: float(self.evaluate(a, b, c)))(x1, x2, t)
        return np.asarray(self.evaluate(x1, x2, t), dtype=float) + np.zeros(shape)

    def derivative_function(self, index: MultiIndex) -> Callable[..., Any]:
        """Return the lambdified ``∂1^a ∂2^b ∂t^c`` of the expression."""

        if self.expr is None:
            raise ValueError(f"Field '{self.label}' has no analytic partials")
        cached = self._derivatives.get(index)
        if cached is None:
            derivative = self.expr
            for symbol, order in zip(COORDINATES, index, strict=True):
                if order:
                    derivative = sympy.diff(derivative, symbol, order)
            cached = sympy.lambdify(COORDINATES, derivative, modules="numpy")
            self._derivatives[index] = cached
        return cached

    def partial(self, index: MultiIndex, p: Point) -> float:
        """Partial derivative at ``p``: analytic when available, otherwise central FD."""

        if self.expr is None:
            return finite_difference(self, index, p)
        value = float(self.derivative_function(index)(p.x1, p.x2, p.t))
        if not math.isfinite(value):
            raise EvaluationError(p, f"∂{index} {self.label}", value)
        return value

    def companion(self, key: str, build: Callable[[], ScalarField]) -> ScalarField:
        """Cached field derived from this one (gradient norm, sub-Laplacian, ...)."""

        cached = self._companions.get(key)
        if cached is None:
            cached = build()
            self._companions[key] = cached
        return cached

    def derived(self, expr: sympy.Expr, label: str) -> ScalarField:
        """Field built from an expression derived from this one (keeps provenance)."""

        provenance = self.provenance if self.provenance != "numeric-only" else "closed-form"
        return ScalarField.from_expr(expr, label=label, provenance=provenance)


def _step(value: float, base: float) -> float:
    h = max(1.0, abs(value)) * base
    # Representable step so that (x + h) − x == h exactly.
    return (value + h) - value


def _shifted(p: Point, deltas: tuple[float, float, float]) -> Point:
    return Point(p.x1 + deltas[0], p.x2 + deltas[1], p.t + deltas[2])


def finite_difference(
    f: ScalarField | Callable[[Point], float], index: MultiIndex, p: Point
) -> float:
    """Central finite-difference partial of order ≤ 2.

    Steps are ``max(1, |coordinate|) · ε^(1/3)`` for first order and ``· ε^(1/4)``
    for second order.

    Raises
    ------
    ValueError
        For derivative orders above two.
    """

    order = sum(index)
    coords = p.as_tuple()
    if order == 0:
        return f(p)
    if order == 1:
        axis = index.index(1)
        h = _step(coords[axis], FIRST_ORDER_STEP)
        delta = tuple(h if i == axis else 0.0 for i in range(3))
        back = tuple(-d for d in delta)
        return (f(_shifted(p, delta)) - f(_shifted(p, back))) / (2.0 * h)
    if order == 2:
        if 2 in index:
            axis = index.index(2)
            h = _step(coords[axis], SECOND_ORDER_STEP)
            delta = tuple(h if i == axis else 0.0 for i in range(3))
            back = tuple(-d for d in delta)
            return (f(_shifted(p, delta)) - 2.0 * f(p) + f(_shifted(p, back))) / (h * h)
        i, j = (axis for axis, k in enumerate(index) if k == 1)
        hi = _step(coords[i], SECOND_ORDER_STEP)
        hj = _step(coords[j], SECOND_ORDER_STEP)

        def shift(si: float, sj: float) -> Point:
            delta = [0.0, 0.0, 0.0]
            delta[i] = si * hi
            delta[j] = sj * hj
            return _shifted(p, (delta[0], delta[1], delta[2]))

        return (f(shift(1, 1)) - f(shift(1, -1)) - f(shift(-1, 1)) + f(shift(-1, -1))) / (
            4.0 * hi * hj
        )
    raise ValueError("Finite differences are limited to second order; supply analytic partials")


@dataclass(frozen=True, slots=True)
class DerivativeBundle:
    """First and second iterated frame derivatives of a field at a point.

    ``fe_ie_j`` stands for ``X_j (X_i f)`` and ``f0 = T f``.
    """

    f: float
    fe1: float
    fe2: float
    f0: float
    fe1e1: float
    fe1e2: float
    fe2e1: float
    fe2e2: float
    analytic: bool = True

    @property
    def commutation_residual(self) -> float:
        """``fe1e2 − fe2e1 − 2 f0``; vanishes for smooth fields."""

        return self.fe1e2 - self.fe2e1 - 2.0 * self.f0


def coordinate_partials(f: ScalarField, p: Point) -> dict[MultiIndex, float]:
    """All coordinate partials of order ≤ 2 at ``p``."""

    return {index: f.partial(index, p) for index in (*FIRST_ORDER, *SECOND_ORDER)}


def apply_frame(f: ScalarField, p: Point) -> DerivativeBundle:
    """Evaluate ``X1 f``, ``X2 f``, ``T f`` and all second iterated derivatives at ``p``.

    Second derivatives are expanded into coordinate partials, e.g.
    ``X1² = ∂11 + 4 x2 ∂1∂t + 4 x2² ∂tt``; no nested finite differences are taken.

    Parameters
    ----------
    f
        Scalar field (analytic partials are used when present).
    p
        Evaluation point.

    Returns
    -------
    DerivativeBundle
        Frame derivatives; ``analytic`` is ``False`` for finite-difference fields.

    Raises
    ------
    EvaluationError
        If any evaluation produces NaN/Inf.
    """

    d = coordinate_partials(f, p)
    x1, x2 = p.x1, p.x2
    d1, d2, dt = d[(1, 0, 0)], d[(0, 1, 0)], d[(0, 0, 1)]
    d11, d22, dtt = d[(2, 0, 0)], d[(0, 2, 0)], d[(0, 0, 2)]
    d12, d1t, d2t = d[(1, 1, 0)], d[(1, 0, 1)], d[(0, 1, 1)]
    return DerivativeBundle(
        f=f(p),
        fe1=d1 + 2.0 * x2 * dt,
        fe2=d2 - 2.0 * x1 * dt,
        f0=2.0 * dt,
        fe1e1=d11 + 4.0 * x2 * d1t + 4.0 * x2 * x2 * dtt,
        fe1e2=d12 + 2.0 * dt + 2.0 * x2 * d2t - 2.0 * x1 * d1t - 4.0 * x1 * x2 * dtt,
        fe2e1=d12 - 2.0 * dt - 2.0 * x1 * d1t + 2.0 * x2 * d2t - 4.0 * x1 * x2 * dtt,
        fe2e2=d22 - 4.0 * x1 * d2t + 4.0 * x1 * x1 * dtt,
        analytic=f.has_partials,
    )


def bracket_residual(f: ScalarField, p: Point) -> float:
    """Return ``(X1 X2 − X2 X1) f (p) + 4 ∂t f (p)``."""

    bundle = apply_frame(f, p)
    return bundle.fe2e1 - bundle.fe1e2 + 2.0 * bundle.f0


def frame_vector(p: Point, a: float, b: float) -> tuple[float, float, float]:
    """Coordinate components of the horizontal vector ``a X1 + b X2`` at ``p``."""

    return (a, b, 2.0 * (a * p.x2 - b * p.x1))
