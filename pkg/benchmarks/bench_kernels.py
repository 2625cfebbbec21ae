"""Compare the compiled and numpy column kernels on one stage.

    python3 benchmarks/bench_kernels.py --M 16 --columns 256

Prints one line per backend with the time per column and per rectangle-column,
and checks that both backends return the same lengths.
"""
import argparse
import time

import numpy as np

from curvedkakeya import _pykernels
from curvedkakeya.construction import ConstructionPlan, build_stage
from curvedkakeya.family import preset
from curvedkakeya.measure import column_points

try:
    from curvedkakeya import _ckernels
except ImportError:
    _ckernels = None


def time_backend(backend, stage, xs, delta, repeat):
    e = np.zeros(0)
    out = np.zeros(xs.size)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        backend.column_lengths(stage.family.kind, stage.apertures, stage.u, stage.v, stage.thickness,
                               delta, e, e, e, 0.0, 0.0, xs, out)
        best = min(best, time.perf_counter() - t)
    return best, out.copy()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=16)
    ap.add_argument("--family", default="parabola")
    ap.add_argument("--columns", type=int, default=256)
    ap.add_argument("--cutoff", default="none")
    ap.add_argument("--delta", type=float, default=0.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    stage = build_stage(ConstructionPlan(preset(args.family), M=args.M, cutoff=args.cutoff))
    xs = column_points(stage.x_window, args.columns)
    work = len(stage) * xs.size
    results = {}
    backends = [("numpy", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"M={args.M} rects={len(stage)} columns={xs.size} family={args.family}")
    for name, backend in backends:
        secs, out = time_backend(backend, stage, xs, args.delta, args.repeat)
        results[name] = (secs, out)
        print(f"{name:>7}: {secs:8.3f} s  {secs / xs.size * 1e3:8.3f} ms/column  "
              f"{secs / work * 1e9:7.2f} ns/rect-column")
    if len(results) == 2:
        (tn, on), (tc, oc) = results["numpy"], results["cython"]
        print(f"speedup {tn / tc:.1f}x, max |difference| {np.max(np.abs(on - oc)):.3e}")


if __name__ == "__main__":
    main()
