import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvedkakeya.construction import (ConstructionPlan, binary_floor, build_stage,
                                       build_translation_table, cutoff_fraction, dump_csv, dump_npz,
                                       eps, load_csv, load_npz)
from curvedkakeya.errors import ConfigError, DataError, SizeError


def test_binary_floor_examples():
    assert [binary_floor(27, j) for j in (2, 3, 5)] == [26, 24, 16]
    assert binary_floor(16, 5) == 16


@given(st.integers(0, 2 ** 40))
def test_binary_floor_j1_identity(n):
    assert binary_floor(n, 1) == n


@given(st.integers(0, 2 ** 30), st.integers(1, 31))
def test_binary_floor_clears_low_bits(n, j):
    f = binary_floor(n, j)
    assert f <= n and f % (1 << (j - 1)) == 0 and n - f < (1 << (j - 1))


def test_plan_validation(parabola):
    for bad in (dict(M=10), dict(M=4), dict(a0=0.5), dict(a0=1.5, delta0=0.6), dict(delta0=0.0),
                dict(cutoff="bogus")):
        with pytest.raises(ConfigError):
            ConstructionPlan(parabola, **bad)
    ConstructionPlan(parabola, M=4, strict=False)


def test_cutoff_windows(parabola):
    assert cutoff_fraction(8) == 1.5
    assert ConstructionPlan(parabola, M=16).x_window == (1.0, 1.0)
    assert ConstructionPlan(parabola, M=32).x_window == (0.625, 1.0)
    assert ConstructionPlan(parabola, M=24).x_window[0] == pytest.approx(4 * math.log2(24) / 24)


def test_theory_cutoff_rejects_m8(parabola):
    with pytest.raises(ConfigError, match="exceeds 1"):
        build_stage(ConstructionPlan(parabola, M=8))


def test_m32_refused(parabola):
    with pytest.raises(SizeError):
        build_translation_table(ConstructionPlan(parabola, M=32))


def test_tangent_points(parabola):
    p = ConstructionPlan(parabola, M=16)
    assert p.tangent_points == [2 * j / 16 for j in range(9)]
    assert p.n_steps == 7


def test_step_one_closed_form(parabola):
    plan = ConstructionPlan(parabola, M=12, cutoff="none")
    tab = build_translation_table(plan)
    for n in range(1, 1 << 12, 2):
        a = 1.0 + n * plan.h
        assert tab.u_step(1, n) == pytest.approx(plan.h / a * plan.tangent_point(1), rel=1e-12)


def test_step_lookup_rejects_non_leaders(parabola):
    tab = build_translation_table(ConstructionPlan(parabola, M=8, cutoff="none"))
    with pytest.raises(KeyError):
        tab.step(2, 3)


def _chain_oracle(tab, n):
    total_u = total_v = 0.0
    for j in tab.u_step_levels:
        if eps(n, j):
            u, v = tab.step(j, binary_floor(n, j))
            total_u += u
            total_v += v
    return total_u, total_v


def test_chain_identity_n27(parabola):
    tab = build_translation_table(ConstructionPlan(parabola, M=16, cutoff="none"))
    expected = sum(tab.u_step(j, k) for j, k in ((1, 27), (2, 26), (4, 24), (5, 16)))
    assert tab.u_total[27] == pytest.approx(expected, abs=1e-18)


def test_chain_identity_all(any_family):
    tab = build_translation_table(ConstructionPlan(any_family, M=12, cutoff="none"))
    for n in range(1 << 12):
        u, v = _chain_oracle(tab, n)
        assert abs(tab.u_total[n] - u) <= 1e-12
        assert abs(tab.v_total[n] - v) <= 1e-12


def test_gating_ignores_unset_bits(parabola):
    tab = build_translation_table(ConstructionPlan(parabola, M=8, cutoff="none"))
    assert tab.u_total[0] == 0.0
    # n = 4 has only bit 3 set, so only step 3 moves it
    assert tab.u_total[4] == tab.u_step(3, 4)


def test_translation_bounds(any_family):
    consts = []
    for M in (12, 16):
        tab = build_translation_table(ConstructionPlan(any_family, M=M, cutoff="none"))
        assert tab.u_total.min() >= 0.0 and tab.v_total.min() >= -1e-12
        c = tab.fitted_constants()
        consts.append(c["C_u"])
        for j in tab.u_step_levels:
            U, V = tab.partial(j)
            assert U.min() >= 0.0
            assert U.max() <= c["C_U_partial"] * 2.0 ** (j - M) * (1 + 1e-12)
    assert max(consts) / min(consts) <= 2.0


def test_partial_sums_telescoping(parabola):
    tab = build_translation_table(ConstructionPlan(parabola, M=12, cutoff="none"))
    U, V = tab.partial(max(tab.u_step_levels))
    np.testing.assert_array_equal(U, tab.u_total)
    z, _ = tab.partial(0)
    assert not z.any()


@pytest.mark.parametrize("M", [8, 12])
def test_bottom_curve_dominance_within_groups(any_family, M):
    plan = ConstructionPlan(any_family, M=M, cutoff="none")
    tab = build_translation_table(plan)
    x = np.linspace(0.0, 1.0, 1000)
    a = plan.a0 + np.arange(1 << M) * plan.h
    for j in tab.u_step_levels:
        U, V = tab.partial(j)
        leader = (np.arange(1 << M) >> j) << j
        t = x[None, :] - U[:, None]
        tl = x[None, :] - U[leader][:, None]
        ok = (t >= 0) & (t <= 1) & (tl >= 0) & (tl <= 1)
        bottom = a[:, None] * any_family.f(np.clip(t, 0, 1)) + V[:, None]
        lead = a[leader][:, None] * any_family.f(np.clip(tl, 0, 1)) + V[leader][:, None]
        assert np.min(np.where(ok, bottom - lead, 0.0)) >= -1e-9


def test_determinism(parabola):
    plan = ConstructionPlan(parabola, M=12, cutoff="none")
    t1, t2 = build_translation_table(plan), build_translation_table(plan)
    assert t1.u_total.tobytes() == t2.u_total.tobytes()
    assert t1.v_total.tobytes() == t2.v_total.tobytes()


def test_stage_shape(stage8):
    assert len(stage8) == 256
    r = stage8.rect(5)
    assert r.aperture == 1.0 + 5 * 2.0 ** -8
    assert r.thickness == 2.0 ** -8
    assert r.shift == (stage8.u[5], stage8.v[5])
    assert r.x_window == (0.0, 1.0)
    assert sum(1 for _ in stage8.rects()) == 256


def test_csv_roundtrip(stage8):
    buf = io.StringIO()
    dump_csv(stage8, buf)
    text = buf.getvalue()
    assert text.startswith("# family=parabola")
    assert text.splitlines()[1] == "n,aperture,thickness,u,v"
    assert len(text.splitlines()) == 2 + 256
    back = load_csv(io.StringIO(text))
    np.testing.assert_array_equal(back.u, stage8.u)
    np.testing.assert_array_equal(back.v, stage8.v)
    np.testing.assert_array_equal(back.apertures, stage8.apertures)
    assert back.x_window == stage8.x_window and back.thickness == stage8.thickness


def test_npz_roundtrip(stage8, tmp_path):
    path = tmp_path / "s.npz"
    dump_npz(stage8, path)
    back = load_npz(path)
    np.testing.assert_array_equal(back.u, stage8.u)
    assert back.x_window == stage8.x_window


def test_load_rejects_garbage():
    with pytest.raises(DataError):
        load_csv(io.StringIO("n,aperture\n"))
