"""Nested sets K_1 ⊇ K_2 ⊇ ... built by rerunning the block construction inside every rectangle.

Level k + 1 replaces each rectangle of K_k (aperture a, thickness h) by a copy
of F_(M_(k+1)) with a0 = a and delta0 = h, whose tangent points are spread over
the current window [A_k, 1], and then applies the parent's shift. The window
after d levels is [A_d, 1] with

    A_d = 1 - prod_l (1 - c(M_l)),   c(M) = 4 log2(M) / M.

Children are built directly in the parent's coordinates. Because the tangency
system commutes with translations, this equals undoing the parent shift,
rescaling the window to [0, 1], building and mapping back; the rescaled route
is kept behind ``rescaled=True`` as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .construction import (
    DEFAULT_MAX_RECTS,
    ConstructionPlan,
    StageSet,
    accumulate,
    build_stage,
    cutoff_fraction,
    step_arrays,
)
from .errors import ConfigError, SizeError
from .family import CurveFamily
from .measure import column_lengths, column_points

DEFAULT_BUDGET = 2 ** 24


def window_start(m_sequence: Sequence[int], cutoff: str = "theory") -> float:
    """A_d = 1 - prod (1 - c(M_l)) over the given levels."""
    prod = 1.0
    for M in m_sequence:
        prod *= 1.0 - cutoff_fraction(M, cutoff)
    return 1.0 - prod


def power_sequence(M: int, depth: int) -> tuple:
    """The default choice M_n = M^n."""
    return tuple(M ** n for n in range(1, depth + 1))


@dataclass(frozen=True)
class IterationPlan:
    family: CurveFamily
    m_sequence: tuple
    a0: float = 1.0
    delta0: float = 1.0
    cutoff: str = "theory"
    rect_budget: int = DEFAULT_BUDGET
    rescaled: bool = False
    strict: bool = True

    def __post_init__(self):
        seq = tuple(int(M) for M in self.m_sequence)
        object.__setattr__(self, "m_sequence", seq)
        if not seq:
            raise ConfigError("m_sequence must contain at least one level")
        total = sum(seq)
        if total > 62 or 2 ** total > self.rect_budget:
            raise SizeError(f"2^{total} rectangles exceed the budget {self.rect_budget}")
        if 2 ** total > DEFAULT_MAX_RECTS:
            raise SizeError(f"2^{total} rectangles exceed the materialisation limit")
        # validate every level's block parameters up front (apertures checked at level 1)
        ConstructionPlan(self.family, self.a0, self.delta0, seq[0], self.cutoff, strict=self.strict)
        for M in seq[1:]:
            ConstructionPlan(self.family, 1.0, 1.0, M, self.cutoff, strict=self.strict)
        if self.cutoff == "theory":
            bad = [M for M in seq if cutoff_fraction(M) >= 1.0]
            if bad:
                raise ConfigError(f"4*log2(M)/M >= 1 for M in {bad}; use a diagnostic cutoff")

    @property
    def depth(self) -> int:
        return len(self.m_sequence)

    def window(self, depth: Optional[int] = None) -> tuple:
        d = self.depth if depth is None else depth
        return (window_start(self.m_sequence[:d], self.cutoff), 1.0)


def _rescaled_family(family: CurveFamily, origin: float) -> CurveFamily:
    """t -> f(origin + (1 - origin) t), an admissible family on [0, 1] again."""
    s = 1.0 - origin
    fam = CurveFamily(
        f"{family.name}@{origin!r}",
        lambda t: family.f(origin + s * t),
        lambda t: s * family.df(origin + s * t),
        lambda t: s * s * family.d2f(origin + s * t),
        lambda t: s ** 3 * family.d3f(origin + s * t),
        c2_norm=max(family.c2_norm, 1e-300),
        inf_f2=s * s * family.inf_f2,
        sup_f3=s ** 3 * family.sup_f3,
    )
    return fam


def _child_steps(plan: IterationPlan, level: int, a_par: np.ndarray, h_par: float):
    M = plan.m_sequence[level]
    origin = window_start(plan.m_sequence[:level], plan.cutoff)
    n_steps = M // 2 - 1
    h = h_par * 2.0 ** -M
    if not plan.rescaled:
        def tangent_point(j):
            return origin + (1.0 - origin) * 2.0 * j / M
        return step_arrays(plan.family, a_par, h, M, n_steps, tangent_point)
    fam = _rescaled_family(plan.family, origin)
    u_step, v_step = step_arrays(fam, a_par, h, M, n_steps, lambda j: 2.0 * j / M)
    s = 1.0 - origin
    return {j: s * u for j, u in u_step.items()}, v_step


def build_iterated(plan: IterationPlan) -> StageSet:
    """The depth-d set K_d: 2^(M_1 + ... + M_d) rectangles with ancestor paths."""
    first = ConstructionPlan(plan.family, plan.a0, plan.delta0, plan.m_sequence[0],
                             "none", strict=plan.strict)
    stage = build_stage(first)
    apertures, u, v, h = stage.apertures, stage.u, stage.v, stage.thickness
    path = np.zeros((len(apertures), 0), dtype=np.int64)
    for level in range(1, plan.depth):
        M = plan.m_sequence[level]
        u_step, v_step = _child_steps(plan, level, apertures, h)
        U, V = accumulate(u_step, v_step, M)
        h_child = h * 2.0 ** -M
        r = np.arange(1 << M, dtype=np.float64)
        apertures_new = (apertures[:, None] + r[None, :] * h_child).ravel()
        u = (U + u[:, None]).ravel()
        v = (V + v[:, None]).ravel()
        parents = np.repeat(np.arange(len(apertures), dtype=np.int64), 1 << M)
        path = np.column_stack([path[parents], parents]) if path.shape[1] else parents[:, None]
        apertures, h = apertures_new, h_child
        del U, V
    lo, hi = plan.window()
    if plan.cutoff == "theory" and u.size and float(u.max()) >= lo:
        raise ConfigError(f"max horizontal shift {float(u.max())!r} >= window start {lo!r}")
    out = StageSet(plan.family, apertures, h, u, v, (lo, hi), depth=plan.depth, plan=plan,
                   parent_path=path if plan.depth > 1 else None)
    if plan.depth == 1:
        out.table = stage.table
    return out


@dataclass(frozen=True)
class NestingResult:
    contained: bool
    worst_violation: float
    columns: int


def nesting_check(outer: StageSet, inner: StageSet, delta_outer: float, delta_inner: float,
                  columns: int = 512, threads: int = 1, slack: float = 1e-12) -> NestingResult:
    """Is inner(delta_inner) contained in outer(delta_outer), column by column?

    At each column of the inner window the violation is
    |inner ∪ outer| - |outer| (zero exactly when the inner slice is covered).
    The inner window must lie inside the outer one.
    """
    if not (outer.x_window[0] - 1e-15 <= inner.x_window[0] and inner.x_window[1] <= outer.x_window[1] + 1e-15):
        raise ConfigError(f"inner window {inner.x_window} is not inside outer window {outer.x_window}")
    if columns < 1:
        raise ConfigError("columns must be positive")
    xs = column_points(inner.x_window, columns)
    both = column_lengths(outer, xs, delta_outer, threads, other=inner, other_delta=delta_inner)
    alone = column_lengths(outer, xs, delta_outer, threads)
    worst = float(np.max(both - alone)) if columns else 0.0
    worst = max(worst, 0.0)
    return NestingResult(worst <= slack, worst, columns)
