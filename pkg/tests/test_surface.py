import math

import numpy as np
import pytest

from hyperwave.errors import RegimeError
from hyperwave.regimes import WaveParameters
from hyperwave.surface import (POLE_SWITCH, SERIES_EPS, SurfaceProfile, capG,
                               capH, capH_curvature, gs_over_gamma,
                               potential_gradient, s_one, tildeG)

SPHERE = SurfaceProfile.sphere()
PSEUDO = SurfaceProfile.pseudosphere()


def test_profile_functions_match_closed_forms():
    for s in (0.3, 1.0, 2.5):
        assert SPHERE.gamma(s) == pytest.approx(math.sin(s), abs=1e-15)
        assert SPHERE.gamma_s(s) == pytest.approx(math.cos(s), abs=1e-15)
        assert SPHERE.capF(s) == pytest.approx(1.0 - math.cos(s), abs=1e-15)
        assert PSEUDO.gamma(s) == pytest.approx(math.sinh(s), abs=1e-15)
        assert PSEUDO.capF(s) == pytest.approx(math.cosh(s) - 1.0, rel=1e-15)


def test_odd_symmetry():
    for s in (0.7, 1.9):
        assert SPHERE.gamma(-s) == -SPHERE.gamma(s)
        assert SPHERE.capF(-s) == SPHERE.capF(s)
        assert SPHERE.f_over_gamma(-s) == -SPHERE.f_over_gamma(s)
        assert SPHERE.f_over_gamma2(-s) == SPHERE.f_over_gamma2(s)


def test_half_angle_ratios_continuous_at_series_switch():
    # even-series chart below SERIES_EPS must agree with the direct quotient
    for surf in (SPHERE, PSEUDO):
        for fn in (surf.f_over_gamma, surf.f_over_gamma2):
            lo = fn(SERIES_EPS * (1.0 - 1e-9))
            hi = fn(SERIES_EPS * (1.0 + 1e-9))
            assert lo == pytest.approx(hi, rel=1e-12)


def test_ratio_values_near_zero():
    # F/Gamma = tan(s/2) on the sphere, tanh(s/2) on the pseudosphere
    s = 1e-5
    assert SPHERE.f_over_gamma(s) == pytest.approx(math.tan(s / 2), rel=1e-13)
    assert PSEUDO.f_over_gamma(s) == pytest.approx(math.tanh(s / 2), rel=1e-13)
    assert SPHERE.f_over_gamma(0.0) == 0.0
    assert SPHERE.f_over_gamma2(0.0) == 0.5


def test_pole_chart_agrees_with_direct_evaluation():
    st = 0.05  # inside the switch window of the compact pole
    assert st < POLE_SWITCH
    s = math.pi - st
    assert SPHERE.gamma1(st) == pytest.approx(SPHERE.gamma(s), rel=1e-12)
    assert SPHERE.capF1(st) == pytest.approx(
        SPHERE.capF(math.pi) - SPHERE.capF(s), rel=1e-12)
    assert SPHERE.gamma1_s(st) == pytest.approx(-SPHERE.gamma_s(s), rel=1e-12)


def test_potential_gradient_continuous_at_pole_switch():
    params = WaveParameters(mu=1.0, k=1.0, c=1.0, b=-3.0)
    lo = potential_gradient(SPHERE, params, math.pi - POLE_SWITCH * (1 + 1e-8))
    hi = potential_gradient(SPHERE, params, math.pi - POLE_SWITCH * (1 - 1e-8))
    assert lo == pytest.approx(hi, rel=1e-6)


def test_potential_gradient_is_derivative_of_effective_potential():
    params = WaveParameters(mu=0.0, k=1.2, c=0.7, b=-2.5)
    h = 1e-6
    for surf in (SPHERE, PSEUDO):
        for s in (0.4, 1.3, 2.2):
            veff = lambda x: capG(surf, params, x) + \
                0.5 * params.c ** 2 * (surf.capF(x) / surf.gamma(x)) ** 2
            fd = (veff(s + h) - veff(s - h)) / (2 * h)
            assert potential_gradient(surf, params, s) == pytest.approx(
                fd, rel=2e-9, abs=1e-9)


def test_tildeG_matches_quotient_derivative():
    # tildeG = (d/ds)(F^2/(2 Gamma^2)) / (-1) convention check via c^2 term
    params = WaveParameters(mu=0.0, k=0.0, c=1.0, b=0.0)
    h = 1e-6
    s = 0.9
    quot = lambda x: 0.5 * (SPHERE.capF(x) / SPHERE.gamma(x)) ** 2
    fd = (quot(s + h) - quot(s - h)) / (2 * h)
    assert potential_gradient(SPHERE, params, s) == pytest.approx(fd, rel=1e-9)


def test_capG_values():
    params = WaveParameters(mu=1.0, k=1.0, c=1.0, b=-3.0)
    s = 1.0
    expect = 0.5 * math.sin(s) ** 2 - 3.0 * (1 - math.cos(s)) - (1 - math.cos(s)) ** 2
    assert capG(SPHERE, params, s) == pytest.approx(expect, rel=1e-14)


def test_capH_at_compact_pole():
    # H(pi) = -2 G(pi) + 4 mu c F(pi): Gamma(pi) = 0, F(pi) = 2
    params = WaveParameters(mu=3.0, k=1.0, c=-1.0, b=-3.0)
    g_pi = -3.0 * 2.0 - 1.0 * 4.0  # b k F + ... with Gamma = 0
    assert capG(SPHERE, params, math.pi) == pytest.approx(g_pi, abs=1e-13)
    assert capH(SPHERE, params, math.pi) == pytest.approx(-4.0, abs=1e-12)


def test_capH_spot_value():
    # at s = pi: G = 2bk - 4k^2 = -10, so H = -2G + 8 mu c = 20 + 16 = 36
    params = WaveParameters(mu=2.0, k=1.0, c=1.0, b=-3.0)
    assert capH(SPHERE, params, math.pi) == pytest.approx(36.0, abs=1e-12)


def test_capH_curvature_sign_and_s_one():
    good = WaveParameters(mu=3.0, k=1.0, c=-1.0, b=-3.0)
    assert capH_curvature(good) > 0
    z = s_one(SPHERE, good)
    assert 0.0 < z < math.pi
    assert capH(SPHERE, good, z) == pytest.approx(0.0, abs=1e-10)
    # H must be positive strictly inside (0, s1)
    for s in np.linspace(0.05, z * 0.99, 20):
        assert capH(SPHERE, good, float(s)) > 0.0


def test_s_one_requires_positive_curvature():
    flat = WaveParameters(mu=0.1, k=1.0, c=-1.0, b=-3.0)
    if capH_curvature(flat) <= 0:
        with pytest.raises(RegimeError):
            s_one(SPHERE, flat)


def test_custom_surface_roundtrip():
    surf = SurfaceProfile.custom(math.sin, math.cos, gamma3=-1.0, s0=math.pi)
    assert surf.compact
    assert surf.gamma(0.8) == pytest.approx(math.sin(0.8), rel=1e-12)
    assert surf.capF(0.8) == pytest.approx(1 - math.cos(0.8), rel=1e-8)


def test_gs_over_gamma_series():
    params = WaveParameters(mu=1.0, k=1.0, c=1.0, b=-3.0)
    s = 1e-6
    # regular at the origin: limit is k^2 + b k
    assert gs_over_gamma(SPHERE, params, s) == pytest.approx(params.kk, abs=1e-5)
    mid = 1.3
    expected = (params.k ** 2 * math.cos(mid) + params.b * params.k
                - 2.0 * params.k ** 2 * (1.0 - math.cos(mid)))
    assert gs_over_gamma(SPHERE, params, mid) == pytest.approx(expected, rel=1e-13)
