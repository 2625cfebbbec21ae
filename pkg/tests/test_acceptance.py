"""Acceptance criteria, one test each, printing one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s -v``. The full module takes
roughly 20 minutes on one core; the M = 24 measures dominate.
"""
import io
import math
import time

import numpy as np
import pytest

from curvedkakeya.cli import main as cli_main
from curvedkakeya.construction import (ConstructionPlan, binary_floor, build_stage,
                                       build_translation_table, eps)
from curvedkakeya.errors import SizeError
from curvedkakeya.family import PRESET_NAMES, preset
from curvedkakeya.iteration import IterationPlan, build_iterated, nesting_check
from curvedkakeya.maximal import WitnessSet, exponent_fit, r_delta_indicator, ratio_lower_bound
from curvedkakeya.measure import measure_stage, scaled_group_thickness
from curvedkakeya.tangency import dominance_gaps, solve_tangency
from oracles import raster_measure

pytestmark = pytest.mark.slow


def report(capsys, number, passed, detail, seconds):
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} ({seconds:.1f} s) {detail}"
    with capsys.disabled():
        print("\n" + line)
    return line


# --- shared computations -------------------------------------------------------------

def table_csv(M):
    tab = build_translation_table(ConstructionPlan(preset("parabola"), M=M, cutoff="none"))
    buf = io.StringIO()
    buf.write("n,u_total,v_total\n")
    for n in range(len(tab.u_total)):
        buf.write(f"{n},{tab.u_total[n]!r},{tab.v_total[n]!r}\n")
    return tab, buf.getvalue()


def sweep_csv(tmp_path, name):
    out = tmp_path / name
    code = cli_main(["sweep", "--M-values", "16,24", "--cutoff", "small", "--columns", "4096",
                     "--delta", "0", "--out", str(out)])
    assert code == 0
    return out.read_text()


MAX_HEADER = "kind,p,q,delta,ratio,fitted_slope\n"


def maximal_run(M, columns):
    fam = preset("parabola")
    stage = build_stage(ConstructionPlan(fam, M=M, cutoff="none"))
    delta = 2.0 ** -M
    w = WitnessSet.stage(stage, delta)
    est = ratio_lower_bound(w, 3.0, 3.0, np.linspace(1.0, 2.0, 256), columns=columns)
    return est


def maximal_csv(ests):
    rows = [MAX_HEADER]
    for M, est in ests:
        rows.append(f"stage,3.0,3.0,{2.0 ** -M!r},{est.ratio_lower_bound!r},\n")
    return "".join(rows)


@pytest.fixture(scope="module")
def store():
    return {}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


# --- criteria -------------------------------------------------------------------------

def test_c01_tangency_exactness(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    fam = preset("parabola")
    worst_rel = 0.0
    for _ in range(1000):
        at = rng.uniform(1.0, 2.0)
        a = rng.uniform(at, 2.0)
        x0 = rng.uniform(1e-3, 1.0)
        sol = solve_tangency(fam, a, at, x0)
        exact = x0 * (a - at) / a
        if exact > 0:
            worst_rel = max(worst_rel, abs(sol.u - exact) / exact)
    worst_res = 0.0
    for name in PRESET_NAMES:
        f = preset(name)
        for _ in range(1000):
            at = rng.uniform(1.0, 1.9)
            a = at + rng.uniform(0.0, 0.1)
            x0 = rng.uniform(0.3, 1.0)
            sol = solve_tangency(f, a, at, x0)
            worst_res = max(worst_res, abs(sol.residual_c0), abs(sol.residual_c1))
    dt = time.perf_counter() - t0
    ok = worst_rel <= 1e-12 and worst_res <= 1e-10 and dt < 5.0
    report(capsys, 1, ok, f"max rel err {worst_rel:.2e} (<=1e-12), max residual {worst_res:.2e} (<=1e-10)", dt)
    assert ok


def test_c02_dominance(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_min, worst_loc = np.inf, 0.0
    for i in range(1000):
        fam = preset(PRESET_NAMES[i % 3])
        at = rng.uniform(1.0, 1.9)
        a = at + rng.uniform(0.0, 0.1)
        x0 = rng.uniform(0.3, 1.0)
        sol = solve_tangency(fam, a, at, x0)
        xs, gaps = dominance_gaps(fam, a, at, x0, sol, 10_000)
        worst_min = min(worst_min, float(gaps.min()))
        zeros = xs[gaps <= 1e-9]
        dist = float(np.min(np.abs(zeros - x0))) if zeros.size else np.inf
        worst_loc = max(worst_loc, dist)
    dt = time.perf_counter() - t0
    ok = worst_min >= -1e-9 and worst_loc <= 2e-3 and dt < 30.0
    report(capsys, 2, ok, f"min gap {worst_min:.2e} (>=-1e-9), farthest zero from x0 {worst_loc:.1e} (<=2e-3)", dt)
    assert ok


def test_c03_chain_identity(capsys, store):
    t0 = time.perf_counter()
    tab16, csv16 = table_csv(16)
    store["c3_csv"] = csv16
    worst = 0.0
    u_oracle = np.zeros(1 << 16)
    v_oracle = np.zeros(1 << 16)
    for n in range(1 << 16):
        su = sv = 0.0
        for j in tab16.u_step_levels:
            if eps(n, j):
                u, v = tab16.step(j, binary_floor(n, j))
                su += u
                sv += v
        u_oracle[n], v_oracle[n] = su, sv
    worst = max(float(np.max(np.abs(u_oracle - tab16.u_total))),
                float(np.max(np.abs(v_oracle - tab16.v_total))))
    c16 = tab16.fitted_constants()
    tab24 = build_translation_table(ConstructionPlan(preset("parabola"), M=24, cutoff="none"))
    c24 = tab24.fitted_constants()
    C = max(c16["C_u"], c16["C_v"])
    in_bounds = (tab16.u_total.min() >= 0 and tab16.v_total.min() >= 0
                 and tab16.u_total.max() <= C * 2.0 ** -8 * (1 + 1e-12)
                 and tab16.v_total.max() <= C * 2.0 ** -8 * (1 + 1e-12))
    ratio_u = max(c16["C_u"], c24["C_u"]) / min(c16["C_u"], c24["C_u"])
    ratio_v = max(c16["C_v"], c24["C_v"]) / min(c16["C_v"], c24["C_v"])
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and in_bounds and ratio_u <= 2 and ratio_v <= 2
    report(capsys, 3, ok,
           f"max |prefix - gated sum| {worst:.1e}; C_u {c16['C_u']:.4f}/{c24['C_u']:.4f}, "
           f"C_v {c16['C_v']:.4f}/{c24['C_v']:.4f} at M=16/24 (ratios {ratio_u:.3f}, {ratio_v:.3f} <= 2)", dt)
    assert ok


def test_c04_measure_decay(capsys, store, workdir):
    t0 = time.perf_counter()
    text = sweep_csv(workdir, "sweep_a.csv")
    store["c4_csv"] = text
    rows = [line.split(",") for line in text.splitlines()[1:]]
    meas = {int(r[0]): float(r[3]) for r in rows}
    try:
        build_translation_table(ConstructionPlan(preset("parabola"), M=32, cutoff="small"))
        m32_note = "M=32 built"
        have32 = True
    except SizeError as exc:
        m32_note = f"M=32 not computable here ({exc})"
        have32 = False
    scaled = {M: m * M * M for M, m in meas.items()}
    decreasing = all(meas[a] > meas[b] for a, b in zip(sorted(meas), sorted(meas)[1:]))
    spread = max(scaled.values()) / min(scaled.values())
    dt = time.perf_counter() - t0
    ok = have32 and decreasing and spread <= 4 and dt < 120
    detail = (", ".join(f"|F_{M}|*M^2={s:.3f}" for M, s in sorted(scaled.items()))
              + f"; decreasing={decreasing}, spread {spread:.2f} (<=4); {m32_note}")
    report(capsys, 4, ok, detail, dt)
    assert ok, detail


def test_c05_group_thickness(capsys):
    t0 = time.perf_counter()
    M = 16
    stage = build_stage(ConstructionPlan(preset("parabola"), M=M, cutoff="none"))
    m = M // 2
    literal = list(range(8, m))
    js = literal or list(range(int(math.log2(M)), m))
    vals = {j: scaled_group_thickness(stage, j) for j in js}
    spread = max(vals.values()) / min(vals.values())
    dt = time.perf_counter() - t0
    ok = spread <= 2.0
    note = "" if literal else " (stated range j in {8..m-1} is empty for M=16; used j in [log2 M, m-1])"
    report(capsys, 5, ok, ", ".join(f"j={j}: {v:.3f}" for j, v in vals.items())
           + f"; spread {spread:.3f} (<=2){note}", dt)
    assert ok


def test_c06_raster_oracle(capsys):
    t0 = time.perf_counter()
    stage = build_stage(ConstructionPlan(preset("parabola"), M=8, cutoff="none"))
    m = measure_stage(stage, 0.0, 4096).measure
    r = raster_measure(stage, 0.0, 2048)
    rel = abs(m - r) / r
    dt = time.perf_counter() - t0
    ok = rel <= 0.02 and dt < 60
    report(capsys, 6, ok, f"columns {m:.6f} vs raster {r:.6f}, rel diff {rel:.2e} (<=2e-2)", dt)
    assert ok


def test_c07_nesting(capsys):
    t0 = time.perf_counter()
    fam = preset("parabola")
    k1 = build_iterated(IterationPlan(fam, (8,), cutoff="none"))
    k2 = build_iterated(IterationPlan(fam, (8, 16), cutoff="none"))
    res = nesting_check(k1, k2, 2.0 ** -8, 2.0 ** -24, columns=512)
    m1 = measure_stage(k1, 2.0 ** -8, 512).measure * 8 ** 2
    m2 = measure_stage(k2, 2.0 ** -24, 512).measure * 24 ** 2
    spread = max(m1, m2) / min(m1, m2)
    dt = time.perf_counter() - t0
    ok = res.contained and res.worst_violation <= 1e-12 and spread <= 4
    report(capsys, 7, ok, f"worst violation {res.worst_violation:.1e} (<=1e-12); "
                          f"|K1|*8^2={m1:.3f}, |K2|*24^2={m2:.3f}, spread {spread:.2f} (<=4)", dt)
    assert ok


def test_c08_maximal_lower_bound(capsys, store):
    t0 = time.perf_counter()
    est16 = maximal_run(16, 4096)
    t16 = time.perf_counter() - t0
    est24 = maximal_run(24, 1024)
    store["c8_csv"] = maximal_csv([(16, est16), (24, est24)])
    c16 = est16.ratio_lower_bound / 16 ** (2 / 3)
    c24 = est24.ratio_lower_bound / 24 ** (2 / 3)
    dt = time.perf_counter() - t0
    ok = est16.values.min() >= 0.5 and max(c16, c24) / min(c16, c24) <= 2 and dt < 120
    report(capsys, 8, ok, f"min_a R = {est16.values.min():.4f} (>=0.5); c = ratio/(log2 1/delta)^(2/3): "
                          f"{c16:.4f} (M=16), {c24:.4f} (M=24), ratio {max(c16, c24) / min(c16, c24):.3f} (<=2); "
                          f"M=16 part {t16:.1f} s", dt)
    assert ok


def test_c09_appendix_exponents(capsys):
    t0 = time.perf_counter()
    fam = preset("parabola")
    deltas = [2.0 ** -k for k in range(6, 15)]
    slab = exponent_fit("slab_S", 2.0, math.inf, deltas, fam)
    rect = exponent_fit("rect_T", 2.0, math.inf, deltas, fam)
    dt = time.perf_counter() - t0
    ok = abs(slab.slope + 0.5) <= 0.15 and abs(rect.slope + 0.25) <= 0.15 and dt < 120
    report(capsys, 9, ok, f"slab_S slope {slab.slope:.4f} (-0.5 +- 0.15), rect_T slope {rect.slope:.4f} "
                          f"(-0.25 +- 0.15)", dt)
    assert ok


def test_c10_determinism(capsys, store, workdir):
    t0 = time.perf_counter()
    if not {"c3_csv", "c4_csv", "c8_csv"} <= set(store):
        pytest.skip("criteria 3, 4 and 8 must run first in the same session")
    same3 = table_csv(16)[1] == store["c3_csv"]
    same4 = sweep_csv(workdir, "sweep_b.csv") == store["c4_csv"]
    same8 = maximal_csv([(16, maximal_run(16, 4096)), (24, maximal_run(24, 1024))]) == store["c8_csv"]
    dt = time.perf_counter() - t0
    ok = same3 and same4 and same8
    report(capsys, 10, ok, f"byte-identical reruns: criterion 3 {same3}, criterion 4 {same4}, criterion 8 {same8}", dt)
    assert ok
