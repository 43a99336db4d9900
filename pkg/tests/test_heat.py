import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunkl_czo_lab.calculus import DunklOracleConfig, dunkl_apply, dunkl_apply_second
from dunkl_czo_lab.errors import ConfigError, DomainError
from dunkl_czo_lab.geometry import preset, z2n
from dunkl_czo_lab.heat import (
    HeatContext, heat_Aij, heat_Aij_parts, heat_eval, heat_mass_1d, heat_Tj, log_dunkl_kernel,
    make_heat_context, semigroup_residual,
)

mp.mp.dps = 40


def bessel_kernel(k, z):
    """Rank-one Dunkl kernel through modified Bessel functions, in high precision."""
    z = mp.mpf(z)
    if z == 0:
        return mp.mpf(1)
    az = abs(z)
    pre = mp.gamma(k + mp.mpf(1) / 2) * (az / 2) ** (mp.mpf(1) / 2 - k)
    return pre * (mp.besseli(k - mp.mpf(1) / 2, az) + mp.sign(z) * mp.besseli(k + mp.mpf(1) / 2, az))


@pytest.mark.parametrize("k", [0.5, 1.0, 2.3])
@pytest.mark.parametrize("z", [-80.0, -31.0, -29.0, -3.0, -1e-3, 0.0, 0.2, 5.0, 29.5, 30.5, 200.0])
def test_kernel_against_bessel_form(k, z):
    ref = float(mp.log(bessel_kernel(k, z)))
    assert float(log_dunkl_kernel(k, z)) == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_zero_multiplicity_is_gaussian():
    ctx = HeatContext(z2n(1, 0.0))
    t, x, y = 0.7, np.array([0.3]), np.array([-1.1])
    g = math.exp(-(0.3 + 1.1) ** 2 / (4 * t)) / math.sqrt(4 * math.pi * t)
    assert float(heat_eval(ctx, t, x, y)) == pytest.approx(g, rel=1e-14)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.3])
@pytest.mark.parametrize("t,x", [(0.05, 0.0), (1.0, 0.8), (4.0, -3.0)])
def test_unit_mass(k, t, x):
    assert heat_mass_1d(k, t, x) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-4, 4), min_size=4, max_size=4), st.floats(0.05, 5), st.integers(0, 3))
def test_symmetry_and_invariance(v, t, g):
    ctx = HeatContext(z2n(2, [1.0, 0.5]))
    x, y = np.array(v[:2]), np.array(v[2:])
    sig = np.array([(-1) ** (g & 1), (-1) ** (g >> 1)])
    h = heat_eval(ctx, t, x, y)
    assert heat_eval(ctx, t, y, x) == pytest.approx(h, rel=1e-12)
    assert heat_eval(ctx, t, sig * x, sig * y) == pytest.approx(h, rel=1e-12)


def test_semigroup():
    ctx = HeatContext(z2n(2, [1.0, 0.5]))
    assert semigroup_residual(ctx, 0.3, 0.5, [0.4, -1.0], [1.2, 0.7]) < 1e-10


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.3])
def test_first_derivative_against_difference_oracle(kappa):
    spec = z2n(2, kappa)
    ctx = HeatContext(spec)
    cfg = DunklOracleConfig()
    x, y, t = np.array([0.6, -0.9]), np.array([-0.2, 0.5]), 0.4
    for j in range(2):
        fd = dunkl_apply(cfg, spec, lambda p: heat_eval(ctx, t, p, y), np.eye(2)[j], x)
        assert float(heat_Tj(ctx, t, x, y, j)) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("i,j", [(0, 0), (0, 1), (1, 1)])
def test_structure_formula_against_second_differences(i, j):
    spec = z2n(2, [1.0, 0.5])
    ctx = HeatContext(spec)
    cfg = DunklOracleConfig()
    x, y, t = np.array([0.7, 0.45]), np.array([-0.3, 0.9]), 0.5
    fd = dunkl_apply_second(cfg, spec, lambda p: heat_eval(ctx, t, p, y), i, j, x)
    exact = float(heat_Aij(ctx, t, x, y, i, j))
    scale = float(heat_eval(ctx, t, x, y)) / t
    assert abs(fd - exact) < 1e-5 * scale


def test_parts_sum_to_total():
    ctx = HeatContext(z2n(2, 1.0))
    x, y = np.array([0.2, 1.0]), np.array([0.4, -0.3])
    parts = heat_Aij_parts(ctx, 0.3, x, y, 1, 1)
    assert sum(parts) == pytest.approx(float(heat_Aij(ctx, 0.3, x, y, 1, 1)), rel=1e-13)


def test_rejections():
    with pytest.raises(ConfigError):
        HeatContext(preset("b2"))
    with pytest.raises(ConfigError):
        HeatContext(z2n(5, 1.0))
    with pytest.raises(DomainError):
        heat_eval(HeatContext(z2n(1, 1.0)), 0.0, np.array([1.0]), np.array([1.0]))


def test_validated_context_builds():
    assert make_heat_context(z2n(2, [2.3, 0.5])).dimension == 2


@pytest.mark.parametrize("k", [0.5, 2.3])
def test_heat_equation(k):
    ctx = make_heat_context(z2n(2, k))
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-2, 2, (2, 40, 2))
    t = 10.0 ** rng.uniform(-0.5, 0.5, 40)
    dt = 1e-3 * t
    dh = (8 * (heat_eval(ctx, t + dt, x, y) - heat_eval(ctx, t - dt, x, y))
          - (heat_eval(ctx, t + 2 * dt, x, y) - heat_eval(ctx, t - 2 * dt, x, y))) / (12 * dt)
    lap = heat_Aij(ctx, t, x, y, 0, 0) + heat_Aij(ctx, t, x, y, 1, 1)
    h = heat_eval(ctx, t, x, y)
    assert np.max(np.abs(dh - lap) / (h / t)) < 1e-6


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_mass_at_reference_times(t):
    assert heat_mass_1d(1.0, t, 0.3) == pytest.approx(1.0, abs=1e-9)


def test_dunkl_kernel_eigenfunction_and_oracle_order():
    k, z = 1.0, 0.9
    spec = z2n(1, k)
    x = np.array([[0.7], [-1.3]])

    def ek(p):
        return np.exp(log_dunkl_kernel(k, p[..., 0] * z))

    exact = z * ek(x)
    errs = [np.max(np.abs(dunkl_apply(DunklOracleConfig(h_rel=h), spec, ek, [1.0], x) - exact))
            for h in (4e-3, 2e-3)]
    assert math.log2(errs[0] / errs[1]) > 1.9
    np.testing.assert_allclose(dunkl_apply(DunklOracleConfig(), spec, ek, [1.0], x), exact, rtol=1e-8)
