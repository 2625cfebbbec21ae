import math

import numpy as np
import pytest

from curvedkakeya.construction import ConstructionPlan, build_stage
from curvedkakeya.errors import ConfigError
from curvedkakeya.family import preset
from curvedkakeya.maximal import (APPENDIX_POINTS, WitnessSet, average_along_curve, exponent_fit,
                                  fit_slope, lq_norm, r_delta_indicator, ratio_lower_bound,
                                  witness_index)


def test_big_box_gives_one(parabola):
    box = WitnessSet.box((0, 1), (-10, 10))
    for a in (1.0, 1.5, 2.0):
        assert r_delta_indicator(box, a, family=parabola) == 1.0


def test_box_ratio(parabola):
    box = WitnessSet.box((0, 1), (-10, 10))
    for p in (1.0, 2.0, 3.0):
        est = ratio_lower_bound(box, p, 3.0, np.linspace(1, 2, 9), family=parabola)
        assert est.ratio_lower_bound == pytest.approx(20.0 ** (-1.0 / p), rel=1e-12)


def test_slab_value_is_half_the_mean_profile(parabola):
    # at a = 1 with no translation the curve runs along the slab's lower edge,
    # so the s-average at t is f(t) / 2
    v = r_delta_indicator(WitnessSet.slab(parabola, 1e-3), 1.0)
    assert v == pytest.approx(1.0 / 6.0, abs=0.01)


def test_slab_exponential_half():
    fam = preset("exponential")
    v = r_delta_indicator(WitnessSet.slab(fam, 1e-3), 1.0)
    assert v >= 0.5


def test_values_in_unit_interval(parabola, stage8):
    sets = [WitnessSet.ball(1e-2), WitnessSet.slab(parabola, 1e-2), WitnessSet.rect(parabola, 1e-2),
            WitnessSet.stage(stage8, 2.0 ** -8)]
    for w in sets:
        for a in (1.0, 1.37, 2.0):
            v = r_delta_indicator(w, a, family=parabola, t_nodes=64)
            assert 0.0 <= v <= 1.0


def test_monotone_in_set(parabola):
    small = WitnessSet.box((0.2, 0.6), (0.0, 0.5), delta=1e-2)
    big = WitnessSet.box((0.0, 1.0), (-0.1, 1.0), delta=1e-2)
    trs = [(0.0, 0.0), (-0.1, 0.05), (0.1, -0.2)]
    for a in np.linspace(1, 2, 7):
        # identical translations and identical quadrature nodes on [0, 1]
        vs = [average_along_curve(small, a, tr, parabola) for tr in trs]
        vb = [average_along_curve(big, a, tr, parabola) for tr in trs]
        assert all(s <= b + 1e-12 for s, b in zip(vs, vb))


def test_stage_witness(stage8):
    w = WitnessSet.stage(stage8, 2.0 ** -8)
    assert witness_index(stage8, 1.0) == 0
    assert witness_index(stage8, 2.0) == 255
    assert witness_index(stage8, 1.0 + 10.5 * stage8.thickness) == 10
    vals = [r_delta_indicator(w, a) for a in np.linspace(1, 2, 16)]
    assert min(vals) >= 0.5


def test_witness_below_grid(stage8):
    w = WitnessSet.stage(stage8, 2.0 ** -8, witness_only=False)
    for a in (1.1, 1.7):
        wit = r_delta_indicator(w, a, t_nodes=32, s_nodes=4)
        grid = r_delta_indicator(w, a, search="grid", grid=(4, 4), t_nodes=32, s_nodes=4)
        assert wit <= grid + 1e-12


def test_zero_grid_rejected(parabola):
    with pytest.raises(ConfigError):
        r_delta_indicator(WitnessSet.ball(0.1), 1.0, search="grid", grid=(0, 4), family=parabola)


def test_zero_measure_rejected(parabola):
    empty = WitnessSet.box((0, 1), (0, 0))
    with pytest.raises(ZeroDivisionError):
        ratio_lower_bound(empty, 2.0, 2.0, [1.0, 2.0], family=parabola)


def test_lq_norm():
    a = np.linspace(1, 2, 11)
    assert lq_norm(np.ones(11), a, 3.0) == pytest.approx(1.0)
    assert lq_norm(np.arange(11.0), a, math.inf) == 10.0


def test_fit_slope_exact():
    x = np.array([1e-1, 1e-2, 1e-3])
    assert fit_slope(x, 3 * x ** -0.7) == pytest.approx(-0.7)
    with pytest.raises(ConfigError):
        fit_slope([0.1, 0.1], [1.0, 2.0])


def test_appendix_points():
    assert APPENDIX_POINTS["C"] == (3 / 8, 1.0)
    assert APPENDIX_POINTS["G"] == (3 / 8, 5 / 16)
    assert APPENDIX_POINTS["H"] == (1 / 3, 1 / 3)
    assert set(APPENDIX_POINTS) == set("OABCDEFGH")


def test_ball_slope_zero(parabola):
    fit = exponent_fit("ball", math.inf, 2.0, [2.0 ** -k for k in (6, 8, 10, 12)], parabola,
                       a_grid=np.linspace(1, 2, 8))
    assert abs(fit.slope) <= 0.05


def test_rect_slope(parabola):
    fit = exponent_fit("rect_T", 2.0, math.inf, [2.0 ** -k for k in (6, 8, 10, 12, 14)], parabola,
                       a_grid=np.linspace(1, 2, 8))
    assert fit.slope == pytest.approx(-0.25, abs=0.15)
