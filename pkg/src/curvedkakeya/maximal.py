"""Lower bounds for the thickened maximal operator

    R_delta g(a) = sup_(x1, x2) (2 delta)^-1 int_0^1 int_-delta^delta |g(x1 + t, x2 + a f(t) + s)| ds dt

on indicator inputs, and for the norm ratios ||R_delta g||_q / ||g||_p.

The supremum over translations is replaced by a maximum over a finite family
(an explicit witness translation, optionally plus a grid), so every value here
is a lower bound up to quadrature error. The double integral is a midpoint
tensor rule; the t-nodes are laid over the part of [0, 1] where the translated
curve can meet the set, which does not change the integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .construction import StageSet
from .errors import ConfigError, DataError
from .family import CurveFamily
from .measure import merge_intervals, raw_slices

T_NODES = 512
S_NODES = 16
GRID = (64, 64)

# vertices of the (1/p, 1/q) interpolation diagram
APPENDIX_POINTS = {
    "O": (0.0, 0.0),
    "A": (0.0, 1.0),
    "B": (1.0 / 3.0, 1.0),
    "C": (3.0 / 8.0, 1.0),
    "D": (1.0, 1.0),
    "E": (1.0, 0.0),
    "F": (3.0 / 8.0, 0.0),
    "G": (3.0 / 8.0, 5.0 / 16.0),
    "H": (1.0 / 3.0, 1.0 / 3.0),
}

WITNESS_KINDS = ("ball", "slab_S", "rect_T", "stage", "box")


@dataclass
class WitnessSet:
    """An indicator input together with the translation that realises its lower bound.

    Build instances with the class methods; ``payload`` holds the geometry.
    """
    kind: str
    delta: float
    family: Optional[CurveFamily] = None
    payload: dict = field(default_factory=dict)
    _measure: Optional[float] = field(default=None, repr=False)

    # --- constructors -------------------------------------------------------------
    @classmethod
    def ball(cls, delta: float, radius: float = 1.0) -> "WitnessSet":
        return cls("ball", delta, None, {"radius": float(radius)})

    @classmethod
    def box(cls, x_range, y_range, delta: float = 1e-3) -> "WitnessSet":
        return cls("box", delta, None, {"x": tuple(map(float, x_range)), "y": tuple(map(float, y_range))})

    @classmethod
    def slab(cls, family: CurveFamily, delta: float) -> "WitnessSet":
        """S = {(x, a f(x)) : x in [0, 1], a in [1, 1 + delta]}."""
        return cls("slab_S", delta, family)

    @classmethod
    def rect(cls, family: CurveFamily, delta: float) -> "WitnessSet":
        """A parallelogram of width delta^(1/2) and vertical thickness delta.

        Its long side has slope 2 f'(0), the largest slope a f'(0) of the family at
        x = 0, so that every aperture can be laid along it.
        """
        return cls("rect_T", delta, family, {"width": math.sqrt(delta), "slope": 2.0 * float(family.df(0.0))})

    @classmethod
    def stage(cls, stage: StageSet, delta: float, witness_only: bool = True,
              measure: Optional[float] = None) -> "WitnessSet":
        """stage(delta). With ``witness_only`` membership is tested against the
        single rectangle whose aperture interval contains a, a subset of the set,
        which keeps the estimate a rigorous lower bound and cheap to evaluate."""
        return cls("stage", delta, stage.family, {"stage": stage, "witness_only": witness_only},
                   _measure=measure)

    # --- geometry -----------------------------------------------------------------
    def x_support(self) -> tuple:
        k = self.kind
        if k == "ball":
            r = self.payload["radius"]
            return (-r, r)
        if k == "box":
            return self.payload["x"]
        if k == "slab_S":
            return (0.0, 1.0)
        if k == "rect_T":
            return (0.0, self.payload["width"])
        st = self.payload["stage"]
        lo, hi = st.x_window
        return (lo, hi)

    def measure(self, columns: int = 4096) -> float:
        """Lebesgue measure of the set (analytic for the simple witnesses)."""
        if self._measure is not None:
            return self._measure
        k = self.kind
        if k == "ball":
            m = math.pi * self.payload["radius"] ** 2
        elif k == "box":
            (x0, x1), (y0, y1) = self.payload["x"], self.payload["y"]
            m = (x1 - x0) * (y1 - y0)
        elif k == "slab_S":
            x = (np.arange(100_000) + 0.5) / 100_000
            m = self.delta * float(np.mean(self.family.f(x)))
        elif k == "rect_T":
            m = self.payload["width"] * self.delta
        else:
            from .measure import measure_stage
            m = measure_stage(self.payload["stage"], self.delta, columns).measure
        self._measure = m
        return m

    def contains(self, x, y, a: Optional[float] = None) -> np.ndarray:
        """Membership of the points (x, y); ``a`` picks the witness rectangle of a stage."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "ball":
            return x * x + y * y <= self.payload["radius"] ** 2
        if k == "box":
            (x0, x1), (y0, y1) = self.payload["x"], self.payload["y"]
            return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        if k == "slab_S":
            inside = (x >= 0.0) & (x <= 1.0)
            F = self.family.f(np.clip(x, 0.0, 1.0))
            return inside & (y >= F) & (y <= (1.0 + self.delta) * F)
        if k == "rect_T":
            w, sl = self.payload["width"], self.payload["slope"]
            return (x >= 0.0) & (x <= w) & (np.abs(y - sl * x) <= 0.5 * self.delta)
        return self._stage_contains(x, y, a)

    def _stage_contains(self, x, y, a):
        st: StageSet = self.payload["stage"]
        lo_w, hi_w = st.x_window
        in_window = (x >= lo_w) & (x <= hi_w)
        if self.payload["witness_only"]:
            n = witness_index(st, a)
            t = x - st.u[n]
            ok = in_window & (t >= 0.0) & (t <= 1.0)
            F = st.family.f(np.clip(t, 0.0, 1.0))
            lo = st.apertures[n] * F + st.v[n] - self.delta
            hi = (st.apertures[n] + st.thickness) * F + st.v[n] + self.delta
            return ok & (y >= lo) & (y <= hi)
        xb, yb = np.broadcast_arrays(x, y)
        in_window = (xb >= lo_w) & (xb <= hi_w)
        out = np.zeros(xb.shape, dtype=bool)
        cache = self.payload.setdefault("_slices", {})
        for xv in np.unique(xb[in_window]):
            iv = cache.get(xv)
            if iv is None:
                lo, hi, _ = raw_slices(st, float(xv), self.delta)
                iv = merge_intervals(np.column_stack([lo, hi]))
                cache[xv] = iv
            sel = xb == xv
            ys = yb[sel]
            pos = np.searchsorted(iv[:, 0], ys, side="right") - 1
            good = pos >= 0
            hit = np.zeros(ys.shape, dtype=bool)
            hit[good] = ys[good] <= iv[pos[good], 1]
            out[sel] = hit
        return out

    def bounding_box(self, a_max: float = 2.0) -> tuple:
        k = self.kind
        if k == "ball":
            r = self.payload["radius"]
            return (-r, r, -r, r)
        if k == "box":
            return (*self.payload["x"], *self.payload["y"])
        if k == "slab_S":
            return (0.0, 1.0, 0.0, (1.0 + self.delta) * float(self.family.f(1.0)))
        if k == "rect_T":
            w, sl = self.payload["width"], self.payload["slope"]
            return (0.0, w, -0.5 * self.delta, sl * w + 0.5 * self.delta)
        st: StageSet = self.payload["stage"]
        lo, hi = st.x_window
        top = float(np.max((st.apertures + st.thickness) * st.family.f(1.0) + st.v)) if len(st) else 0.0
        return (lo, hi, float(np.min(st.v)) - self.delta if len(st) else 0.0, top + self.delta)

    # --- translations -------------------------------------------------------------
    def witness_translation(self, a: float) -> tuple:
        """The explicit translation (x1, x2) used for the lower bound at aperture a."""
        k = self.kind
        fam = self.family
        if k == "ball":
            # centre the curve's bounding box on the origin
            lo = a * float(fam.f(0.0)) if fam is not None else 0.0
            hi = a * float(fam.f(1.0)) if fam is not None else 0.0
            return (-0.5, -0.5 * (lo + hi))
        if k in ("box", "slab_S"):
            return (0.0, 0.0)
        if k == "rect_T":
            w, sl = self.payload["width"], self.payload["slope"]
            t0 = _slope_point(fam, sl / a, 1.0 - w)
            tm = t0 + 0.5 * w
            return (-t0, sl * 0.5 * w - a * float(fam.f(tm)))
        st: StageSet = self.payload["stage"]
        n = witness_index(st, a)
        return (float(st.u[n]), float(st.v[n]))


def _slope_point(family: CurveFamily, target: float, t_max: float) -> float:
    """Smallest t in [0, t_max] with f'(t) >= target (f' is increasing)."""
    if float(family.df(0.0)) >= target:
        return 0.0
    if float(family.df(t_max)) <= target:
        return t_max
    lo, hi = 0.0, t_max
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(family.df(mid)) < target:
            lo = mid
        else:
            hi = mid
    return hi


def witness_index(stage: StageSet, a: float) -> int:
    """Index of the rectangle whose aperture interval [b, b + h] contains a (clipped)."""
    if len(stage) == 0:
        raise DataError("empty stage has no witness rectangle")
    n = int(np.searchsorted(stage.apertures, a, side="right")) - 1
    return min(max(n, 0), len(stage) - 1)


@dataclass(frozen=True)
class MaximalEstimate:
    a_grid: np.ndarray
    values: np.ndarray
    p: float
    q: float
    ratio_lower_bound: float
    set_measure: float


def _nodes(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def average_along_curve(target: WitnessSet, a: float, translation: tuple, family: CurveFamily,
                        t_nodes: int = T_NODES, s_nodes: int = S_NODES) -> float:
    """(2 delta)^-1 int int 1_target(x1 + t, x2 + a f(t) + s) ds dt for one translation."""
    x1, x2 = translation
    xs_lo, xs_hi = target.x_support()
    t_lo, t_hi = max(0.0, xs_lo - x1), min(1.0, xs_hi - x1)
    if t_hi <= t_lo:
        return 0.0
    t = t_lo + (t_hi - t_lo) * _nodes(t_nodes)
    s = target.delta * (2.0 * _nodes(s_nodes) - 1.0)
    y = x2 + a * family.f(t)
    inside = target.contains((x1 + t)[:, None], y[:, None] + s[None, :], a)
    return float((t_hi - t_lo) * np.mean(inside))


def translation_grid(target: WitnessSet, family: CurveFamily, grid: tuple = GRID) -> np.ndarray:
    """Uniform (nx, ny) grid of translations that can bring the curve over the set's bounding box."""
    nx, ny = grid
    if nx < 1 or ny < 1:
        raise ConfigError("translation grid needs at least one node per axis")
    x0, x1, y0, y1 = target.bounding_box()
    top = 2.0 * float(np.max(family.f(np.linspace(0.0, 1.0, 65))))
    gx = np.linspace(x0 - 1.0, x1, nx)
    gy = np.linspace(y0 - top, y1, ny)
    return np.array([(a, b) for a in gx for b in gy])


def r_delta_indicator(target: WitnessSet, a: float, search: str = "witness", grid: tuple = GRID,
                      family: Optional[CurveFamily] = None, t_nodes: int = T_NODES,
                      s_nodes: int = S_NODES, translations=None) -> float:
    """Lower estimate of R_delta 1_target(a) in [0, 1].

    ``search="witness"`` uses the explicit witness translation; ``"grid"`` adds a
    uniform translation grid (and the witness). ``translations`` replaces both
    with an explicit list.
    """
    fam = family if family is not None else target.family
    if fam is None:
        raise ConfigError("a curve family is required for this witness set")
    if t_nodes < 1 or s_nodes < 1:
        raise ConfigError("quadrature needs at least one node per axis")
    if translations is None:
        if search == "witness":
            translations = [target.witness_translation(a)]
        elif search == "grid":
            translations = [target.witness_translation(a)] + list(map(tuple, translation_grid(target, fam, grid)))
        else:
            raise ConfigError(f"unknown translation search {search!r}")
    best = 0.0
    for tr in translations:
        best = max(best, average_along_curve(target, a, tr, fam, t_nodes, s_nodes))
    return best


def lq_norm(values, a_grid, q: float) -> float:
    """||values||_q over the aperture grid (trapezoid rule; maximum for q = inf)."""
    values = np.asarray(values, dtype=float)
    if math.isinf(q):
        return float(np.max(values))
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.size == 1:
        return float(values[0])
    return float(np.trapezoid(values ** q, a_grid) ** (1.0 / q))


def ratio_lower_bound(target: WitnessSet, p: float, q: float, a_grid=None,
                      family: Optional[CurveFamily] = None, search: str = "witness",
                      columns: int = 4096, **quad) -> MaximalEstimate:
    """||R_delta 1_E||_q / |E|^(1/p) on the aperture grid (default 256 points in [1, 2])."""
    if a_grid is None:
        a_grid = np.linspace(1.0, 2.0, 256)
    a_grid = np.asarray(a_grid, dtype=float)
    values = np.array([r_delta_indicator(target, float(a), search, family=family, **quad) for a in a_grid])
    meas = target.measure(columns)
    if meas <= 0.0:
        raise ZeroDivisionError("the set has zero measure")
    denom = 1.0 if math.isinf(p) else meas ** (1.0 / p)
    return MaximalEstimate(a_grid, values, p, q, lq_norm(values, a_grid, q) / denom, meas)


def fit_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.size < 2 or np.ptp(lx) == 0.0:
        raise ConfigError("degenerate fit: need at least two distinct abscissae")
    return float(np.polyfit(lx, ly, 1)[0])


def witness_for(kind: str, family: CurveFamily, delta: float) -> WitnessSet:
    if kind == "ball":
        w = WitnessSet.ball(delta)
        w.family = family
        return w
    if kind == "slab_S":
        return WitnessSet.slab(family, delta)
    if kind == "rect_T":
        return WitnessSet.rect(family, delta)
    raise ConfigError(f"no closed-form witness of kind {kind!r}; expected ball, slab_S or rect_T")


@dataclass(frozen=True)
class ExponentFit:
    kind: str
    p: float
    q: float
    deltas: tuple
    ratios: tuple
    slope: float


def exponent_fit(kind: str, p: float, q: float, deltas: Sequence[float], family: CurveFamily,
                 a_grid=None, **quad) -> ExponentFit:
    """Fit ratio_lower_bound ~ delta^slope over the given deltas for one witness kind."""
    deltas = tuple(float(d) for d in deltas)
    ratios = tuple(ratio_lower_bound(witness_for(kind, family, d), p, q, a_grid, **quad).ratio_lower_bound
                   for d in deltas)
    return ExponentFit(kind, p, q, deltas, ratios, fit_slope(deltas, ratios))
