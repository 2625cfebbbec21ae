"""The M-stage block F_M.

Start from the curved rectangle {(x, a f(x)) : x in [0, 1], a in [a0, a0 + delta0]}
cut into 2^M thin rectangles T_n of aperture a0 + n h, h = delta0 2^-M. At step
j = 1, ..., m - 1 (m = M / 2) every group leader n = 2^j k + 2^(j-1) is translated,
together with everything already attached to it, so that its bottom curve
becomes tangent at x_j = 2j / M to the bottom curve of n - 2^(j-1). Both curves
are still untranslated at that moment (their low j-1 bits are zero), so every
step is one tangency solve on the original curves. Rectangle n ends up shifted by

    u_n = sum_j eps_j(n) u^(j)[floor_j(n)],   floor_j(n) = n - (n mod 2^(j-1)),

where eps_j(n) is the j-th binary digit of n. Finally the set is cut to
x >= 4 log2(M) / M.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigError, DataError, SizeError
from .family import CurveFamily, preset
from .tangency import solve_tangency_batch

CUTOFF_MODES = ("theory", "small", "none")
DEFAULT_MAX_RECTS = 2 ** 26


def cutoff_fraction(M: int, mode: str = "theory") -> float:
    """Fraction of the x-range thrown away on the left.

    "theory" is 4 log2(M) / M, the cut that makes every surviving column
    compressed; "small" keeps columns from x_j with j >= log2(M); "none" keeps
    everything (diagnostic runs at desk-scale M).
    """
    if mode == "theory":
        return 4.0 * math.log2(M) / M
    if mode == "small":
        return 2.0 * math.log2(M) / M
    if mode == "none":
        return 0.0
    raise ConfigError(f"unknown cutoff mode {mode!r}; expected one of {', '.join(CUTOFF_MODES)}")


def binary_floor(n: int, j: int) -> int:
    """n - (n mod 2^(j-1)): the group leader that governs n's translation at step j."""
    return n - (n % (1 << (j - 1)))


def eps(n: int, j: int) -> int:
    return (n >> (j - 1)) & 1


@dataclass(frozen=True)
class ConstructionPlan:
    family: CurveFamily
    a0: float = 1.0
    delta0: float = 1.0
    M: int = 16
    cutoff: str = "theory"
    steps: Optional[int] = None      # defaults to m - 1
    strict: bool = True              # False admits small M (figures, diagnostics)
    tangent_origin: float = 0.0      # tangent points are spread over [tangent_origin, 1]

    def __post_init__(self):
        M = self.M
        if self.strict:
            if M < 8 or M % 4:
                raise ConfigError(f"M={M} must be a multiple of 4 and at least 8")
        elif M < 2 or M % 2:
            raise ConfigError(f"M={M} must be even and positive")
        if not 1.0 <= self.a0 <= 2.0:
            raise ConfigError(f"a0={self.a0!r} must lie in [1, 2]")
        if not 0.0 < self.delta0 <= 2.0 - self.a0:
            raise ConfigError(f"delta0={self.delta0!r} must satisfy 0 < delta0 <= 2 - a0")
        if self.steps is not None and not 0 <= self.steps <= self.M:
            raise ConfigError(f"steps={self.steps} out of range")
        if not 0.0 <= self.tangent_origin < 1.0:
            raise ConfigError("tangent_origin must lie in [0, 1)")
        cutoff_fraction(M, self.cutoff)

    @property
    def m(self) -> int:
        return self.M // 2

    @property
    def n_steps(self) -> int:
        return self.m - 1 if self.steps is None else self.steps

    @property
    def h(self) -> float:
        return self.delta0 * 2.0 ** -self.M

    def tangent_point(self, j: int) -> float:
        x0 = self.tangent_origin
        return x0 + (1.0 - x0) * 2.0 * j / self.M

    @property
    def tangent_points(self) -> list:
        return [self.tangent_point(j) for j in range(self.m + 1)]

    @property
    def x_window(self) -> tuple:
        x0 = self.tangent_origin
        c = cutoff_fraction(self.M, self.cutoff)
        return (1.0 - (1.0 - x0) * (1.0 - c), 1.0)


def step_arrays(family: CurveFamily, a0, h: float, M: int, n_steps: int, tangent_point):
    """Per-step leader translations for one or many blocks sharing h and M.

    ``a0`` is a scalar or an array of P base apertures. Returns dicts
    j -> (P, 2^(M-j)) arrays; column k holds the translation of leader
    n = 2^j k + 2^(j-1) relative to the untranslated leader n - 2^(j-1).
    """
    a0 = np.atleast_1d(np.asarray(a0, dtype=float))
    u_step, v_step = {}, {}
    for j in range(1, n_steps + 1):
        half = 1 << (j - 1)
        leaders = np.arange(half, 1 << M, 1 << j, dtype=np.int64)
        a = a0[:, None] + leaders[None, :] * h
        a_tilde = a0[:, None] + (leaders - half)[None, :] * h
        u, v = solve_tangency_batch(family, a, a_tilde, tangent_point(j))
        u_step[j], v_step[j] = u, v
    return u_step, v_step


def accumulate(u_step: dict, v_step: dict, M: int, partial_upto: Optional[int] = None):
    """Prefix accumulation of the gated step translations, (P, 2^M) arrays."""
    P = next(iter(u_step.values())).shape[0] if u_step else 1
    n = np.arange(1 << M, dtype=np.int64)
    U = np.zeros((P, 1 << M))
    V = np.zeros((P, 1 << M))
    last = max(u_step, default=0) if partial_upto is None else partial_upto
    for j in range(1, last + 1):
        gate = ((n >> (j - 1)) & 1).astype(bool)
        k = n[gate] >> j
        U[:, gate] += u_step[j][:, k]
        V[:, gate] += v_step[j][:, k]
    return U, V


@dataclass
class TranslationTable:
    plan: ConstructionPlan
    u_step_levels: dict       # j -> array over k of u^(j) at leader 2^j k + 2^(j-1)
    v_step_levels: dict
    u_total: np.ndarray
    v_total: np.ndarray

    def step(self, j: int, n: int) -> tuple:
        """(u^(j)_n, v^(j)_n) for a step-j leader n (n = 2^(j-1) mod 2^j)."""
        if j not in self.u_step_levels or n % (1 << j) != (1 << (j - 1)):
            raise KeyError(f"no step-{j} translation is defined for n={n}")
        k = n >> j
        return float(self.u_step_levels[j][k]), float(self.v_step_levels[j][k])

    def u_step(self, j: int, n: int) -> float:
        return self.step(j, n)[0]

    def v_step(self, j: int, n: int) -> float:
        return self.step(j, n)[1]

    def partial(self, j: int) -> tuple:
        """(U^(j), V^(j)): translations accumulated over steps 1..j, for every n."""
        if j <= 0:
            z = np.zeros_like(self.u_total)
            return z, z.copy()
        us = {i: self.u_step_levels[i][None, :] for i in self.u_step_levels if i <= j}
        vs = {i: self.v_step_levels[i][None, :] for i in self.v_step_levels if i <= j}
        U, V = accumulate(us, vs, self.plan.M, partial_upto=min(j, max(us, default=0)))
        return U[0], V[0]

    def fitted_constants(self) -> dict:
        """Empirical constants in u_n, v_n <= C delta0 2^(-M/2) and U, V <= C delta0 2^(j-M)."""
        p = self.plan
        scale = p.delta0 * 2.0 ** (-p.M / 2)
        out = {"C_u": float(self.u_total.max()) / scale, "C_v": float(self.v_total.max()) / scale}
        cu = cv = 0.0
        for j in self.u_step_levels:
            U, V = self.partial(j)
            s = p.delta0 * 2.0 ** (j - p.M)
            cu = max(cu, float(U.max()) / s)
            cv = max(cv, float(V.max()) / s)
        out["C_U_partial"] = cu
        out["C_V_partial"] = cv
        return out


def build_translation_table(plan: ConstructionPlan) -> TranslationTable:
    if (1 << plan.M) > DEFAULT_MAX_RECTS:
        raise SizeError(f"2^{plan.M} rectangles exceed the materialisation limit 2^{DEFAULT_MAX_RECTS.bit_length() - 1}")
    u_step, v_step = step_arrays(plan.family, plan.a0, plan.h, plan.M, plan.n_steps, plan.tangent_point)
    U, V = accumulate(u_step, v_step, plan.M)
    return TranslationTable(
        plan,
        {j: a[0] for j, a in u_step.items()},
        {j: a[0] for j, a in v_step.items()},
        U[0],
        V[0],
    )


@dataclass(frozen=True)
class CurvedRect:
    """{(x + u, b f(x) + v) : x in [0, 1], b in [aperture, aperture + thickness]} cut to x_window."""
    aperture: float
    thickness: float
    shift: tuple
    x_window: tuple
    index: int


@dataclass
class StageSet:
    family: CurveFamily
    apertures: np.ndarray
    thickness: float
    u: np.ndarray
    v: np.ndarray
    x_window: tuple
    depth: int = 1
    plan: object = None
    parent_path: Optional[np.ndarray] = None   # (N, depth - 1) ancestor indices
    table: Optional[TranslationTable] = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.apertures.shape[0])

    def rect(self, n: int) -> CurvedRect:
        return CurvedRect(float(self.apertures[n]), self.thickness,
                          (float(self.u[n]), float(self.v[n])), self.x_window, n)

    def rects(self) -> Iterator[CurvedRect]:
        for n in range(len(self)):
            yield self.rect(n)

    @classmethod
    def empty(cls, family: CurveFamily, x_window=(0.0, 1.0)) -> "StageSet":
        z = np.zeros(0)
        return cls(family, z, 0.0, z.copy(), z.copy(), tuple(x_window))


def build_stage(plan: ConstructionPlan, table: Optional[TranslationTable] = None) -> StageSet:
    """All 2^M translated rectangles of F_M.

    With cutoff "theory" the window [4 log2(M)/M, 1] must be nonempty and every
    rectangle's horizontal shift must stay below the cut, otherwise
    :class:`ConfigError` is raised. Diagnostic cutoffs skip the shift check.
    """
    lo, hi = plan.x_window
    if lo > hi:
        raise ConfigError(
            f"cutoff 4*log2(M)/M = {lo!r} exceeds 1 for M={plan.M}; use a diagnostic cutoff")
    if table is None:
        table = build_translation_table(plan)
    if plan.cutoff == "theory" and table.u_total.size and float(table.u_total.max()) >= lo:
        raise ConfigError(
            f"max horizontal shift {float(table.u_total.max())!r} >= cutoff {lo!r}; increase M")
    N = 1 << plan.M
    apertures = plan.a0 + np.arange(N, dtype=np.float64) * plan.h
    return StageSet(plan.family, apertures, plan.h, table.u_total, table.v_total,
                    (lo, hi), depth=1, plan=plan, table=table)


# --- dumps -----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def stage_header(stage: StageSet) -> dict:
    meta = {
        "family": stage.family.name,
        "depth": str(stage.depth),
        "x_window": f"{_fmt(stage.x_window[0])},{_fmt(stage.x_window[1])}",
        "rects": str(len(stage)),
    }
    p = stage.plan
    if isinstance(p, ConstructionPlan):
        meta.update(a0=_fmt(p.a0), delta0=_fmt(p.delta0), M=str(p.M), cutoff=p.cutoff)
    elif p is not None and hasattr(p, "m_sequence"):
        meta.update(a0=_fmt(p.a0), delta0=_fmt(p.delta0),
                    M=",".join(str(m) for m in p.m_sequence), cutoff=p.cutoff)
    return meta


def dump_csv(stage: StageSet, fh) -> None:
    """One row per rectangle, ascending n: n,aperture,thickness,u,v[,parent_path].

    A leading ``#`` line carries key=value metadata needed to reload the stage.
    """
    meta = stage_header(stage)
    fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    cols = ["n", "aperture", "thickness", "u", "v"]
    with_path = stage.parent_path is not None and stage.parent_path.shape[1] > 0
    if with_path:
        cols.append("parent_path")
    fh.write(",".join(cols) + "\n")
    th = _fmt(stage.thickness)
    buf = io.StringIO()
    for n in range(len(stage)):
        row = f"{n},{_fmt(stage.apertures[n])},{th},{_fmt(stage.u[n])},{_fmt(stage.v[n])}"
        if with_path:
            row += "," + "/".join(str(int(i)) for i in stage.parent_path[n])
        buf.write(row + "\n")
    fh.write(buf.getvalue())


def dump_npz(stage: StageSet, path) -> None:
    meta = stage_header(stage)
    extra = {} if stage.parent_path is None else {"parent_path": stage.parent_path}
    np.savez(path, apertures=stage.apertures, u=stage.u, v=stage.v,
             thickness=np.float64(stage.thickness), meta=np.array(repr(meta)), **extra)


def _parse_meta(line: str) -> dict:
    if not line.startswith("#"):
        raise DataError("stage dump is missing its '#' metadata line")
    meta = {}
    for tok in line[1:].split():
        k, _, v = tok.partition("=")
        meta[k] = v
    return meta


def _stage_from_meta(meta: dict, apertures, thickness, u, v, parent_path, family=None) -> StageSet:
    fam = family if family is not None else preset(meta["family"])
    lo, hi = (float(s) for s in meta["x_window"].split(","))
    return StageSet(fam, apertures, thickness, u, v, (lo, hi), depth=int(meta.get("depth", 1)),
                    plan=meta, parent_path=parent_path)


def load_csv(fh, family: Optional[CurveFamily] = None) -> StageSet:
    meta = _parse_meta(fh.readline())
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or header[:5] != ["n", "aperture", "thickness", "u", "v"]:
        raise DataError(f"unexpected stage dump header {header!r}")
    rows = list(reader)
    a = np.array([float(r[1]) for r in rows])
    th = float(rows[0][2]) if rows else 0.0
    u = np.array([float(r[3]) for r in rows])
    v = np.array([float(r[4]) for r in rows])
    path = None
    if len(header) > 5 and rows:
        path = np.array([[int(s) for s in r[5].split("/")] for r in rows], dtype=np.int64)
    return _stage_from_meta(meta, a, th, u, v, path, family)


def load_npz(path, family: Optional[CurveFamily] = None) -> StageSet:
    import ast

    with np.load(path) as z:
        meta = ast.literal_eval(str(z["meta"]))
        pp = z["parent_path"] if "parent_path" in z.files else None
        return _stage_from_meta(meta, z["apertures"], float(z["thickness"]), z["u"], z["v"], pp, family)
