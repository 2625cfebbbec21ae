"""Profile functions f on [0, 1] generating the curve family y = a f(x), 1 <= a <= 2.

A family is admissible when

    f'(0) >= 0 and inf f'' > 0,
    f''' is bounded,
    f' f''' - (f'')**2 <= 0,

which makes the family a*f(t) cinematically curved: the determinant
det [[u_tt, u_at], [u_ttt, u_att]] of u(a, t) = a f(t) equals
a ((f'')**2 - f' f''').

Evaluators must accept and return numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import FamilyError

Evaluator = Callable[[np.ndarray], np.ndarray]

# Kernel codes understood by the compiled column kernels; -1 means "evaluate in numpy".
KIND_GENERIC = -1
KIND_PARABOLA = 0
KIND_PARABOLA_PLUS_LINEAR = 1
KIND_EXPONENTIAL = 2


@dataclass(frozen=True)
class CurveFamily:
    name: str
    eval0: Evaluator
    eval1: Evaluator
    eval2: Evaluator
    eval3: Evaluator
    c2_norm: float
    inf_f2: float
    sup_f3: float
    kind: int = field(default=KIND_GENERIC, compare=False)

    def f(self, x):
        return self.eval0(np.asarray(x, dtype=float))

    def df(self, x):
        return self.eval1(np.asarray(x, dtype=float))

    def d2f(self, x):
        return self.eval2(np.asarray(x, dtype=float))

    def d3f(self, x):
        return self.eval3(np.asarray(x, dtype=float))

    @classmethod
    def from_evaluators(cls, name: str, f, df, d2f, d3f, grid_size: int = 10_000) -> "CurveFamily":
        """Build a user family; the norms are estimated on a uniform grid."""
        t = np.linspace(0.0, 1.0, grid_size)
        v0, v1, v2, v3 = (np.asarray(g(t), dtype=float) for g in (f, df, d2f, d3f))
        c2 = float(max(np.max(np.abs(v0)), np.max(np.abs(v1)), np.max(np.abs(v2))))
        return cls(name, f, df, d2f, d3f, c2_norm=c2, inf_f2=float(np.min(v2)),
                   sup_f3=float(np.max(np.abs(v3))))


def _const(c: float) -> Evaluator:
    return lambda t: np.full(np.shape(t), c, dtype=float)


_PRESETS = {
    "parabola": lambda: CurveFamily(
        "parabola",
        lambda t: t * t,
        lambda t: 2.0 * t,
        _const(2.0),
        _const(0.0),
        c2_norm=2.0, inf_f2=2.0, sup_f3=0.0, kind=KIND_PARABOLA,
    ),
    "parabola_plus_linear": lambda: CurveFamily(
        "parabola_plus_linear",
        lambda t: t * t + t,
        lambda t: 2.0 * t + 1.0,
        _const(2.0),
        _const(0.0),
        c2_norm=3.0, inf_f2=2.0, sup_f3=0.0, kind=KIND_PARABOLA_PLUS_LINEAR,
    ),
    "exponential": lambda: CurveFamily(
        "exponential",
        np.exp, np.exp, np.exp, np.exp,
        c2_norm=math.e, inf_f2=1.0, sup_f3=math.e, kind=KIND_EXPONENTIAL,
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> CurveFamily:
    """Return one of the built-in families t^2, t^2 + t, e^t."""
    try:
        return _PRESETS[name]()
    except KeyError:
        raise FamilyError(f"unknown family {name!r}; expected one of {', '.join(PRESET_NAMES)}") from None


class Margins(NamedTuple):
    convexity: float          # inf f'' (replaced by f'(0) when f'(0) < 0); must be > tol
    third_derivative: float   # sup |f'''|; must be finite
    curvature_product: float  # max of f' f''' - (f'')^2; must be <= tol


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    grid_size: int
    worst_margins: Margins
    cinematic_det_min: float


def cinematic_determinant(family: CurveFamily, a, t):
    """det [[u_tt, u_at], [u_ttt, u_att]] for u(a, t) = a f(t), assembled entrywise."""
    t = np.asarray(t, dtype=float)
    u_tt = a * family.d2f(t)
    u_at = family.df(t)
    u_ttt = a * family.d3f(t)
    u_att = family.d2f(t)
    return u_tt * u_att - u_at * u_ttt


def validate_family(family: CurveFamily, grid_size: int = 10_000, tol: float = 1e-12) -> ValidationReport:
    if grid_size < 2:
        raise FamilyError("grid_size must be at least 2")
    t = np.linspace(0.0, 1.0, grid_size)
    values = [family.f(t), family.df(t), family.d2f(t), family.d3f(t)]
    for order, v in enumerate(values):
        bad = ~np.isfinite(v)
        if bad.any():
            x = float(t[np.argmax(bad)])
            raise FamilyError(f"derivative of order {order} of {family.name!r} is not finite at t={x!r}")
    _, d1, d2, d3 = values

    fprime0 = float(d1[0])
    convexity = float(np.min(d2)) if fprime0 >= -tol else fprime0
    third = float(np.max(np.abs(d3)))
    product = float(np.max(d1 * d3 - d2 * d2))
    margins = Margins(convexity, third, product)
    passed = convexity > tol and math.isfinite(third) and product <= tol
    det_min = float(np.min(cinematic_determinant(family, 1.0, t)))
    return ValidationReport(passed, grid_size, margins, det_min)
