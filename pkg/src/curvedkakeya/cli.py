"""Command-line driver: ``curvedkakeya <subcommand> [options]``.

Every option can also be set in a ``key = value`` config file given with
``--config``; options on the command line win. Any failure prints one line
``error: <ErrorType>: <message>`` on stderr and exits with status 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .construction import (ConstructionPlan, StageSet, build_stage, dump_csv, dump_npz, load_csv,
                           load_npz)
from .errors import ConfigError, KakeyaError
from .family import preset, validate_family
from .iteration import IterationPlan, build_iterated
from .maximal import WitnessSet, fit_slope, ratio_lower_bound, witness_for
from .measure import measure_stage
from .render import render_svg

SUBCOMMANDS = ("validate", "build", "measure", "sweep", "maximal", "iterate", "render")

MEASURE_HEADER = ["M", "delta", "columns", "measure", "measure_times_M2_over_delta0", "runtime_ms"]
MAXIMAL_HEADER = ["kind", "p", "q", "delta", "ratio", "fitted_slope"]

# (flag, config key, help); every flag takes a string value parsed by the config layer
VALUE_OPTIONS = [
    ("--family", "family", "profile preset: parabola, parabola_plus_linear, exponential [parabola]"),
    ("--a0", "a0", "base aperture a0 in [1, 2] [1]"),
    ("--delta0", "delta0", "aperture range delta0 in (0, 2 - a0] [1]"),
    ("--M", "M", "number of binary levels of the block [16]"),
    ("--M-values", "M_values", "comma list of M for sweep and stage witnesses [16,20,24]"),
    ("--m-sequence", "m_sequence", "comma list M_1,...,M_d for iterate [8,16]"),
    ("--cutoff", "cutoff", "x-window cut: theory (4 log2 M / M), small (2 log2 M / M), none [theory]"),
    ("--steps", "steps", "number of translation steps [M/2 - 1]"),
    ("--columns", "columns", "quadrature columns for measures [4096]"),
    ("--delta", "delta", "vertical thickening for measure/sweep; 'auto' means 2^-M [0]"),
    ("--deltas", "deltas", "comma list of deltas for exponent fits [2^-6,...,2^-14]"),
    ("--kinds", "kinds", "witness kinds for maximal: ball, slab_S, rect_T, stage [slab_S,rect_T]"),
    ("--p", "p", "comma list of p exponents [2]"),
    ("--q", "q", "comma list of q exponents [inf]"),
    ("--a-points", "a_points", "aperture grid size in [1, 2] [256]"),
    ("--search", "search", "translation search: witness or grid [witness]"),
    ("--rect-budget", "rect_budget", "largest rectangle count iterate may build [2^24]"),
    ("--threads", "threads", "worker threads for column sweeps [1]"),
    ("--seed", "seed", "seed for randomised checks [0]"),
    ("--samples", "samples", "samples per curve in render [32]"),
    ("--output", "output", "output directory [out]"),
]
FLAG_OPTIONS = [
    ("--diagnostic", "cutoff", "none", "shorthand for --cutoff none"),
    ("--no-strict", "strict", False, "allow M that is not a multiple of 4 or below 8"),
    ("--rescaled", "rescaled", True, "iterate via the rescale-and-map-back route"),
    ("--timing", "timing", True, "fill the runtime_ms column (breaks byte-identical reruns)"),
]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    for flag, key, text in VALUE_OPTIONS:
        common.add_argument(flag, dest=key, default=None, help=text)
    for flag, key, value, text in FLAG_OPTIONS:
        common.add_argument(flag, dest=f"flag_{flag[2:].replace('-', '_')}", action="store_const",
                            const=value, default=None, help=text)
    common.add_argument("--dump", help="stage dump to read (measure, render) or write (build, iterate)")
    common.add_argument("--out", help="output file (defaults to a name inside --output)")
    common.add_argument("--format", choices=("csv", "npz"), default=None, help="stage dump format [csv]")

    parser = argparse.ArgumentParser(prog="curvedkakeya", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "check the admissibility conditions of the family",
        "build": "build the block F_M and write a stage dump",
        "measure": "measure a thickened stage (from --dump or built from the config)",
        "sweep": "build and measure F_M for every M in --M-values",
        "maximal": "norm-ratio lower bounds and exponent fits for witness sets",
        "iterate": "build the nested set K_d for --m-sequence and write a dump",
        "render": "draw a stage as SVG",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
        if name == "render":
            p.add_argument("--figure", action="store_true",
                           help="16 rectangles after two steps (M=4, diagnostic window)")
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {key: getattr(args, key) for _, key, _ in VALUE_OPTIONS}
    if overrides.get("delta") == "auto":
        overrides["delta"] = None
        auto = True
    else:
        auto = False
    for flag, key, _, _ in FLAG_OPTIONS:
        val = getattr(args, f"flag_{flag[2:].replace('-', '_')}")
        if val is not None:
            overrides[key] = val
    cfg = load_config(args.config, overrides)
    cfg.extra["auto_delta"] = auto
    return cfg


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "inf" if math.isinf(x) else repr(x)


def _out_path(args, cfg: RunConfig, default_name: str) -> str:
    if args.out:
        path = args.out
    else:
        path = os.path.join(cfg.output, default_name)
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    return path


def _write_csv(path: str, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _plan(cfg: RunConfig, M: Optional[int] = None) -> ConstructionPlan:
    return ConstructionPlan(preset(cfg.family), cfg.a0, cfg.delta0, cfg.M if M is None else M,
                            cfg.cutoff, steps=cfg.steps, strict=cfg.strict)


def _delta_for(cfg: RunConfig, M: int) -> float:
    return 2.0 ** -M if cfg.extra.get("auto_delta") else cfg.delta


def _load_stage(path: str) -> StageSet:
    if not os.path.exists(path):
        raise ConfigError(f"stage dump {path!r} does not exist")
    if path.endswith(".npz"):
        return load_npz(path)
    with open(path, encoding="utf-8") as fh:
        return load_csv(fh)


def _write_stage(stage: StageSet, path: str, fmt: Optional[str]) -> None:
    if fmt == "npz" or (fmt is None and path.endswith(".npz")):
        with open(path, "wb") as fh:
            dump_npz(stage, fh)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            dump_csv(stage, fh)


def _measure_row(cfg: RunConfig, M_label, delta: float, stage: StageSet, scale_M: Optional[int],
                 delta0: Optional[float]) -> list:
    t = time.perf_counter()
    rep = measure_stage(stage, delta, cfg.columns, cfg.threads)
    ms = (time.perf_counter() - t) * 1e3
    scaled = rep.measure * scale_M ** 2 / delta0 if scale_M and delta0 else None
    return [M_label, _fmt(delta), cfg.columns, _fmt(rep.measure), _fmt(scaled),
            f"{ms:.1f}" if cfg.timing else ""]


# --- subcommands ---------------------------------------------------------------------

def cmd_validate(args, cfg: RunConfig) -> int:
    fam = preset(cfg.family)
    rep = validate_family(fam)
    m = rep.worst_margins
    print("family,passed,grid_size,convexity,third_derivative,curvature_product,cinematic_det_min")
    print(",".join([fam.name, str(rep.passed).lower(), str(rep.grid_size), _fmt(m.convexity),
                    _fmt(m.third_derivative), _fmt(m.curvature_product), _fmt(rep.cinematic_det_min)]))
    if not rep.passed:
        print(f"error: FamilyError: family {fam.name!r} fails the admissibility conditions", file=sys.stderr)
        return 2
    return 0


def cmd_build(args, cfg: RunConfig) -> int:
    stage = build_stage(_plan(cfg))
    ext = "npz" if args.format == "npz" else "csv"
    path = args.dump or _out_path(args, cfg, f"stage_M{cfg.M}.{ext}")
    _write_stage(stage, path, args.format)
    print(f"wrote {len(stage)} rectangles to {path}")
    return 0


def cmd_measure(args, cfg: RunConfig) -> int:
    if args.dump:
        stage = _load_stage(args.dump)
        meta = stage.plan if isinstance(stage.plan, dict) else {}
        m_text = meta.get("M", "")
        single = m_text.isdigit()
        M = int(m_text) if single else None
        delta = _delta_for(cfg, sum(int(s) for s in m_text.split(",") if s) if m_text else 0)
        d0 = float(meta["delta0"]) if "delta0" in meta and single else None
        row = _measure_row(cfg, m_text.replace(",", "+"), delta, stage, M, d0)
    else:
        stage = build_stage(_plan(cfg))
        row = _measure_row(cfg, cfg.M, _delta_for(cfg, cfg.M), stage, cfg.M, cfg.delta0)
    path = _out_path(args, cfg, "measure.csv")
    _write_csv(path, MEASURE_HEADER, [row])
    print(",".join(str(c) for c in row))
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    rows = []
    for M in cfg.M_values:
        stage = build_stage(_plan(cfg, M))
        rows.append(_measure_row(cfg, M, _delta_for(cfg, M), stage, M, cfg.delta0))
        del stage
    path = _out_path(args, cfg, "sweep.csv")
    _write_csv(path, MEASURE_HEADER, rows)
    for r in rows:
        print(",".join(str(c) for c in r))
    return 0


def cmd_maximal(args, cfg: RunConfig) -> int:
    fam = preset(cfg.family)
    a_grid = np.linspace(1.0, 2.0, cfg.a_points)
    rows = []
    for kind in cfg.kinds:
        for p in cfg.p:
            for q in cfg.q:
                if kind == "stage":
                    deltas, ratios = [], []
                    for M in cfg.M_values:
                        stage = build_stage(_plan(cfg, M))
                        d = 2.0 ** -M
                        w = WitnessSet.stage(stage, d)
                        est = ratio_lower_bound(w, p, q, a_grid, search=cfg.search, columns=cfg.columns)
                        deltas.append(d)
                        ratios.append(est.ratio_lower_bound)
                else:
                    deltas = list(cfg.deltas)
                    ratios = [ratio_lower_bound(witness_for(kind, fam, d), p, q, a_grid,
                                                search=cfg.search).ratio_lower_bound for d in deltas]
                slope = fit_slope(deltas, ratios) if len(set(deltas)) > 1 else None
                for d, r in zip(deltas, ratios):
                    rows.append([kind, _fmt(p), _fmt(q), _fmt(d), _fmt(r), _fmt(slope)])
    path = _out_path(args, cfg, "maximal.csv")
    _write_csv(path, MAXIMAL_HEADER, rows)
    for r in rows:
        print(",".join(r))
    return 0


def cmd_iterate(args, cfg: RunConfig) -> int:
    plan = IterationPlan(preset(cfg.family), cfg.m_sequence, cfg.a0, cfg.delta0, cfg.cutoff,
                         cfg.rect_budget, cfg.rescaled, cfg.strict)
    stage = build_iterated(plan)
    ext = "npz" if args.format == "npz" else "csv"
    path = args.dump or _out_path(args, cfg, f"iterated_{'_'.join(map(str, cfg.m_sequence))}.{ext}")
    _write_stage(stage, path, args.format)
    print(f"wrote {len(stage)} rectangles (depth {stage.depth}, window "
          f"[{stage.x_window[0]!r}, {stage.x_window[1]!r}]) to {path}")
    return 0


def cmd_render(args, cfg: RunConfig) -> int:
    if args.dump:
        stage = _load_stage(args.dump)
    elif args.figure:
        plan = ConstructionPlan(preset(cfg.family), cfg.a0, cfg.delta0, 4, "none", steps=2, strict=False)
        stage = build_stage(plan)
    else:
        stage = build_stage(_plan(cfg))
    svg = render_svg(stage, cfg.samples, title=f"{len(stage)} curved rectangles")
    path = _out_path(args, cfg, "figure.svg" if args.figure else "stage.svg")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)
    print(f"wrote {path}")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "build": cmd_build,
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "maximal": cmd_maximal,
    "iterate": cmd_iterate,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (KakeyaError, OSError, ZeroDivisionError, MemoryError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
