"""Pure numpy versions of the compiled column kernels (same signatures)."""
from __future__ import annotations

import numpy as np

_PROFILES = {
    0: lambda t: t * t,
    1: lambda t: t * t + t,
    2: np.exp,
}


def union_length(lo, hi) -> float:
    """Length of the union of [lo[i], hi[i]] by sorting and a running-max sweep."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    prev = np.empty_like(reach)
    prev[0] = -np.inf
    prev[1:] = reach[:-1]
    # each interval contributes the part sticking out beyond everything before it
    return float(np.sum(np.maximum(hi - np.maximum(lo, prev), 0.0)))


def _slices(kind, b, u, v, th, d, x0):
    t = x0 - u
    keep = (t >= 0.0) & (t <= 1.0)
    F = _PROFILES[kind](t[keep])
    lo = b[keep] * F + v[keep] - d
    hi = (b[keep] + th) * F + v[keep] + d
    return lo, hi


def column_lengths(kind, b1, u1, v1, th1, d1, b2, u2, v2, th2, d2, xs, out) -> None:
    if kind not in _PROFILES:
        raise ValueError("kind must be 0, 1 or 2")
    for c, x0 in enumerate(xs):
        lo, hi = _slices(kind, b1, u1, v1, th1, d1, x0)
        if len(b2):
            lo2, hi2 = _slices(kind, b2, u2, v2, th2, d2, x0)
            lo, hi = np.concatenate([lo, lo2]), np.concatenate([hi, hi2])
        out[c] = union_length(lo, hi)
