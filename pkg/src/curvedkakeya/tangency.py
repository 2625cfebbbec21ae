"""Tangency-forcing translations.

Given apertures a >= a_tilde and an abscissa x0, find (u, v) with

    a f(x0 - u) + v = a_tilde f(x0)
    a f'(x0 - u)    = a_tilde f'(x0)

so the translated curve a f(x - u) + v touches a_tilde f(x) at x0 and, because
f' f''' <= (f'')^2, stays above it everywhere else.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OrderingError, SolverError
from .family import CurveFamily

RESIDUAL_TOL = 1e-14
MAX_ITER = 100


@dataclass(frozen=True)
class TangencySolution:
    u: float
    v: float
    f2_eff: float        # (f'(x0) - f'(x0 - u)) / u, the mean of f'' over [x0 - u, x0]
    residual_c0: float
    residual_c1: float


def solve_u(family: CurveFamily, a, a_tilde, x0):
    """Vectorised safeguarded Newton for a f'(x0 - u) = a_tilde f'(x0).

    All arguments broadcast. Returns an array of u >= 0. The residual
    g(u) = a f'(x0 - u) - a_tilde f'(x0) is decreasing in u, nonnegative at 0
    and negative at the bracket end 2 (a - a_tilde) |f|_C2 / inf f''.
    """
    a, a_tilde, x0 = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (a, a_tilde, x0)))
    if np.any(a < a_tilde):
        raise OrderingError("tangency requires a >= a_tilde")
    target = a_tilde * family.df(x0)
    diff = a - a_tilde

    lo = np.zeros(a.shape)
    hi = 2.0 * diff * family.c2_norm / family.inf_f2
    g_hi = a * family.df(x0 - hi) - target
    trivial = (diff == 0.0) | (a * family.df(x0) - target <= 0.0)
    if np.any((g_hi > 0.0) & ~trivial):
        raise SolverError("no sign change on the tangency bracket")

    u = np.clip(diff * family.df(x0) / (a * family.inf_f2), lo, hi)
    u = np.where(trivial, 0.0, u)
    active = ~trivial
    for _ in range(MAX_ITER):
        if not active.any():
            break
        g = a * family.df(x0 - u) - target
        done = np.abs(g) <= RESIDUAL_TOL * np.maximum(1.0, np.abs(target))
        # g decreasing: g > 0 means the root lies to the right of u
        lo = np.where(active & (g > 0.0), u, lo)
        hi = np.where(active & (g < 0.0), u, hi)
        step = g / (a * family.d2f(x0 - u))
        cand = u + step
        bad = ~((cand > lo) & (cand < hi)) | ~np.isfinite(cand)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        stalled = cand == u
        active = active & ~done & ~stalled & (hi > lo)
        u = np.where(active, cand, u)
    return u


def solve_tangency(family: CurveFamily, a: float, a_tilde: float, x0: float) -> TangencySolution:
    if a < a_tilde:
        raise OrderingError(f"a={a!r} is smaller than a_tilde={a_tilde!r}")
    if a == a_tilde:
        return TangencySolution(0.0, 0.0, float(family.d2f(x0)), 0.0, 0.0)
    u = float(solve_u(family, a, a_tilde, x0))
    if x0 - u < 0.0:
        raise DomainError(f"x0 - u = {x0 - u!r} leaves [0, 1]")
    f_shift = float(family.f(x0 - u))
    v = a_tilde * float(family.f(x0)) - a * f_shift
    r0 = a * f_shift + v - a_tilde * float(family.f(x0))
    r1 = a * float(family.df(x0 - u)) - a_tilde * float(family.df(x0))
    if u > 0.0:
        f2 = (float(family.df(x0)) - float(family.df(x0 - u))) / u
    else:
        f2 = float(family.d2f(x0))
    return TangencySolution(u, v, f2, r0, r1)


def solve_tangency_batch(family: CurveFamily, a, a_tilde, x0):
    """Arrays (u, v) for many tangency problems at once; no per-item residuals."""
    u = solve_u(family, a, a_tilde, x0)
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), u.shape)
    if np.any(x0 - u < 0.0):
        raise DomainError("x0 - u leaves [0, 1] for some tangency problem")
    v = np.asarray(a_tilde) * family.f(x0) - np.asarray(a) * family.f(x0 - u)
    return u, v


def dominance_gaps(family: CurveFamily, a: float, a_tilde: float, x0: float,
                   sol: TangencySolution, grid_size: int = 10_000):
    """Gap a f(x - u) + v - a_tilde f(x) on a uniform grid plus the point x0.

    Only abscissae with x - u in [0, 1] (and x in [0, 1]) are kept.
    """
    xs = np.union1d(np.linspace(0.0, 1.0, grid_size), [x0])
    xs = xs[(xs - sol.u >= 0.0) & (xs - sol.u <= 1.0)]
    gaps = a * family.f(xs - sol.u) + sol.v - a_tilde * family.f(xs)
    return xs, gaps


def verify_dominance(family: CurveFamily, a: float, a_tilde: float, x0: float,
                     sol: TangencySolution, grid_size: int = 10_000) -> float:
    """Minimum of the dominance gap; >= -1e-9 for an admissible family."""
    _, gaps = dominance_gaps(family, a, a_tilde, x0, sol, grid_size)
    return float(gaps.min()) if gaps.size else 0.0
