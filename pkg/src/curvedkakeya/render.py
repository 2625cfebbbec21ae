"""SVG rendering of a stage: one closed band per rectangle, guides at the tangent points."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .construction import ConstructionPlan, StageSet
from .errors import ConfigError

WIDTH, HEIGHT, MARGIN = 800, 600, 40
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _f(x: float) -> str:
    return f"{x:.3f}"


def band_outline(stage: StageSet, n: int, samples: int):
    """Bottom curve left to right then top curve right to left, clipped to the window."""
    lo, hi = stage.x_window
    u, v = float(stage.u[n]), float(stage.v[n])
    t0, t1 = max(0.0, lo - u), min(1.0, hi - u)
    if t1 < t0:
        return None
    t = np.linspace(t0, t1, samples)
    F = stage.family.f(t)
    b = float(stage.apertures[n])
    bottom = np.column_stack([t + u, b * F + v])
    top = np.column_stack([t + u, (b + stage.thickness) * F + v])[::-1]
    return np.vstack([bottom, top])


def render_svg(stage: StageSet, samples_per_curve: int = 32, y_range: Optional[tuple] = None,
               guides: Optional[list] = None, title: str = "") -> str:
    """Deterministic SVG 1.1 document of the stage.

    Groups of four consecutive indices share a colour, so clusters formed by the
    first two steps are easy to spot.
    """
    if samples_per_curve < 8:
        raise ConfigError("samples_per_curve must be at least 8")
    outlines = [(n, band_outline(stage, n, samples_per_curve)) for n in range(len(stage))]
    outlines = [(n, o) for n, o in outlines if o is not None]
    x_lo, x_hi = stage.x_window
    if x_hi <= x_lo:
        x_lo, x_hi = 0.0, 1.0
    if y_range is None:
        if outlines:
            ys = np.concatenate([o[:, 1] for _, o in outlines])
            y_range = (float(ys.min()), float(ys.max()))
        else:
            y_range = (0.0, 1.0)
    y_lo, y_hi = y_range
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0

    def X(x):
        return MARGIN + (np.asarray(x) - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def Y(y):
        return HEIGHT - MARGIN - (np.asarray(y) - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
    ]
    if title:
        out.append(f'<title>{title}</title>')
    out.append('<g id="axes" stroke="#000" stroke-width="1">')
    out.append(f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}"/>')
    out.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}"/>')
    out.append("</g>")
    if guides is None and isinstance(stage.plan, ConstructionPlan):
        guides = [stage.plan.tangent_point(j) for j in range(1, stage.plan.n_steps + 1)]
    if guides:
        out.append('<g id="guides" stroke="#888" stroke-dasharray="4 4" stroke-width="1">')
        for g in guides:
            if x_lo <= g <= x_hi:
                gx = _f(float(X(g)))
                out.append(f'<line x1="{gx}" y1="{MARGIN}" x2="{gx}" y2="{HEIGHT - MARGIN}"/>')
        out.append("</g>")
    out.append('<g id="bands" stroke-width="0.5" fill-opacity="0.5">')
    for n, o in outlines:
        px, py = X(o[:, 0]), Y(o[:, 1])
        pts = " L ".join(f"{_f(a)} {_f(b)}" for a, b in zip(px, py))
        col = PALETTE[(n >> 2) % len(PALETTE)]
        out.append(f'<path d="M {pts} Z" fill="{col}" stroke="{col}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
