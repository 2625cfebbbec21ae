"""Lebesgue measure of vertically thickened stages.

The thickening S(delta) = {p + (0, e) : p in S, |e| <= delta} is vertical only,
so every column x0 meets a rectangle in one interval

    [b f(x0 - u) + v - delta, (b + h) f(x0 - u) + v + delta]

whenever x0 - u lies in [0, 1]. The measure is the midpoint rule over uniform
columns of the union length of those intervals.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .construction import ConstructionPlan, StageSet
from .errors import ConfigError, DataError, WindowError
from .family import KIND_GENERIC

DEFAULT_COLUMNS = 4096


@dataclass(frozen=True)
class SliceProfile:
    x0: float
    intervals: np.ndarray     # (k, 2), sorted and pairwise disjoint
    total_length: float


@dataclass(frozen=True)
class MeasureReport:
    delta: float
    columns: int
    measure: float
    x_window: tuple
    scaled: Optional[float] = None        # measure * M^2 / delta0 for single stages
    per_column: Optional[tuple] = None    # (xs, lengths) when requested


def merge_intervals(raw) -> np.ndarray:
    """Canonical sorted disjoint union of closed intervals given as (lo, hi) pairs.

    Touching intervals are joined. Returns a (k, 2) float array.
    """
    arr = np.asarray(raw, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise DataError("interval endpoints must be finite")
    if np.any(arr[:, 1] < arr[:, 0]):
        raise DataError("interval with hi < lo")
    if arr.shape[0] == 0:
        return arr
    arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
    lo, hi = arr[:, 0], arr[:, 1]
    reach = np.maximum.accumulate(hi)
    starts = np.ones(len(lo), dtype=bool)
    starts[1:] = lo[1:] > reach[:-1]
    first = np.flatnonzero(starts)
    last = np.r_[first[1:], len(lo)] - 1
    return np.column_stack([lo[first], reach[last]])


def raw_slices(stage: StageSet, x0: float, delta: float = 0.0):
    """(lo, hi, index) of every rectangle crossing the column x0, in index order."""
    t = x0 - stage.u
    idx = np.flatnonzero((t >= 0.0) & (t <= 1.0))
    F = stage.family.f(t[idx])
    base = stage.apertures[idx] * F + stage.v[idx]
    return base - delta, base + stage.thickness * F + delta, idx


def _check_column(stage: StageSet, x0: float) -> None:
    lo, hi = stage.x_window
    if not lo <= x0 <= hi:
        raise WindowError(f"column x0={x0!r} lies outside the window [{lo!r}, {hi!r}]")


def slice(stage: StageSet, x0: float, delta: float = 0.0) -> SliceProfile:  # noqa: A001
    """Merged vertical slice of stage(delta) at x0."""
    _check_column(stage, x0)
    if delta < 0:
        raise ConfigError("delta must be nonnegative")
    lo, hi, _ = raw_slices(stage, x0, delta)
    merged = merge_intervals(np.column_stack([lo, hi]))
    return SliceProfile(float(x0), merged, float(np.sum(merged[:, 1] - merged[:, 0])))


def column_points(x_window: tuple, columns: int) -> np.ndarray:
    lo, hi = x_window
    return lo + (hi - lo) * (np.arange(columns) + 0.5) / columns


def _generic_lengths(sets, xs, out):
    for c, x0 in enumerate(xs):
        los, his = [], []
        for stage, d in sets:
            lo, hi, _ = raw_slices(stage, x0, d)
            los.append(lo)
            his.append(hi)
        out[c] = kernels.union_length(np.ascontiguousarray(np.concatenate(los)),
                                      np.ascontiguousarray(np.concatenate(his)))


def column_lengths(stage: StageSet, xs, delta: float = 0.0, threads: int = 1,
                   other: Optional[StageSet] = None, other_delta: float = 0.0) -> np.ndarray:
    """Union length at each column, optionally of stage(delta) together with other(other_delta).

    Columns are split into ``threads`` contiguous chunks; each chunk is computed
    independently, so the result does not depend on the thread count.
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    out = np.zeros(xs.shape[0])
    if xs.size == 0:
        return out
    sets = [(stage, delta)] + ([(other, other_delta)] if other is not None else [])
    sets = [(s, d) for s, d in sets if len(s)]
    if not sets:
        return out
    kind = stage.family.kind
    if other is not None and other.family.kind != kind:
        kind = KIND_GENERIC

    def run(lo_c: int, hi_c: int) -> None:
        if kind == KIND_GENERIC:
            _generic_lengths(sets, xs[lo_c:hi_c], out[lo_c:hi_c])
            return
        (s1, d1), (s2, d2) = sets[0], (sets[1] if len(sets) > 1 else (None, 0.0))
        arrs1 = [np.ascontiguousarray(a, dtype=float) for a in (s1.apertures, s1.u, s1.v)]
        if s2 is None:
            arrs2, th2 = [np.zeros(0)] * 3, 0.0
        else:
            arrs2 = [np.ascontiguousarray(a, dtype=float) for a in (s2.apertures, s2.u, s2.v)]
            th2 = s2.thickness
        kernels.column_lengths(kind, *arrs1, float(s1.thickness), float(d1),
                               *arrs2, float(th2), float(d2), xs[lo_c:hi_c], out[lo_c:hi_c])

    threads = max(1, min(int(threads), xs.size))
    if threads == 1:
        run(0, xs.size)
    else:
        edges = np.linspace(0, xs.size, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, edges[:-1], edges[1:]))
    return out


def measure_stage(stage: StageSet, delta: float = 0.0, columns: int = DEFAULT_COLUMNS,
                  threads: int = 1, keep_columns: bool = False) -> MeasureReport:
    """|stage(delta)| by the midpoint rule on ``columns`` uniform columns of the window."""
    if columns < 2:
        raise ConfigError("columns must be at least 2")
    if delta < 0:
        raise ConfigError("delta must be nonnegative")
    lo, hi = stage.x_window
    xs = column_points(stage.x_window, columns)
    lengths = column_lengths(stage, xs, delta, threads)
    width = max(hi - lo, 0.0)
    measure = width * float(np.sum(lengths)) / columns
    scaled = None
    plan = stage.plan
    if isinstance(plan, ConstructionPlan):
        scaled = measure * plan.M ** 2 / plan.delta0
    return MeasureReport(float(delta), int(columns), measure, (lo, hi), scaled,
                         (xs, lengths) if keep_columns else None)


def group_extents(stage: StageSet, x0: float, j: int) -> np.ndarray:
    """max top - min bottom of each group of 2^j consecutive indices (leading bits p) at x0."""
    lo, hi, idx = raw_slices(stage, x0, 0.0)
    groups = idx >> j
    ngroups = (len(stage) >> j) if len(stage) else 0
    tops = np.full(ngroups, -np.inf)
    bottoms = np.full(ngroups, np.inf)
    np.maximum.at(tops, groups, hi)
    np.minimum.at(bottoms, groups, lo)
    present = np.isfinite(tops)
    return (tops - bottoms)[present]


def group_thickness(stage: StageSet, x0: float, j: int) -> float:
    """Largest vertical extent over the groups of 2^j rectangles sharing leading bits, at x0.

    Requires a single-stage set, 0 <= j <= m - 1 and x0 in [x_j, x_(j+1)] (the
    column bracket is not enforced for j = 0).
    """
    plan = stage.plan
    if not isinstance(plan, ConstructionPlan):
        raise ConfigError("group_thickness needs a stage built from a ConstructionPlan")
    if not 0 <= j <= plan.m - 1:
        raise ConfigError(f"j={j} out of range [0, {plan.m - 1}]")
    if j > 0:
        a, b = plan.tangent_point(j), plan.tangent_point(j + 1)
        if not a - 1e-12 <= x0 <= b + 1e-12:
            raise ConfigError(f"x0={x0!r} is not in [x_{j}, x_{j + 1}] = [{a!r}, {b!r}]")
    ext = group_extents(stage, x0, j)
    return float(ext.max()) if ext.size else 0.0


def scaled_group_thickness(stage: StageSet, j: int) -> float:
    """group_thickness at the midpoint of [x_j, x_(j+1)] times M^2 2^(M-j) / delta0."""
    plan = stage.plan
    x0 = 0.5 * (plan.tangent_point(j) + plan.tangent_point(j + 1))
    return group_thickness(stage, x0, j) * plan.M ** 2 * 2.0 ** (plan.M - j) / plan.delta0


__all__ = [
    "DEFAULT_COLUMNS", "SliceProfile", "MeasureReport", "merge_intervals", "raw_slices",
    "slice", "column_points", "column_lengths", "measure_stage", "group_extents",
    "group_thickness", "scaled_group_thickness",
]
