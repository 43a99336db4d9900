import math

import mpmath as mp
import numpy as np
import pytest

from dunkl_czo_lab.errors import OrbitDiagonal, PreconditionViolated
from dunkl_czo_lab.kernels import (
    TimeQuadrature, heat_parameter_integral_check, heat_time_integral, integrated_kernel, integrated_ratio,
    integrated_value, regularity_probe, theta, theta_ratio, theta_value,
)
from dunkl_czo_lab.symbols import builtin_symbol


def _mp_time_integral(k, x, y):
    """int_0^inf T_x T_x h_t(x, y) dt / sqrt(t) on the line, from the Bessel form in high precision."""
    mp.mp.dps = 25
    k = mp.mpf(k)
    c = 2 ** (2 * k + mp.mpf(1) / 2) * mp.gamma(k + mp.mpf(1) / 2)

    def E(z):
        az = abs(z)
        pre = mp.gamma(k + mp.mpf(1) / 2) * (az / 2) ** (mp.mpf(1) / 2 - k)
        return pre * (mp.besseli(k - mp.mpf(1) / 2, az) + mp.sign(z) * mp.besseli(k + mp.mpf(1) / 2, az))

    def h(t, u):
        return mp.exp(-(u * u + y * y) / (4 * t)) * E(u * y / (2 * t)) / (c * (2 * t) ** (k + mp.mpf(1) / 2))

    def A(t):
        g = lambda u: (y - u) / (2 * t) * h(t, u)  # noqa: E731  first Dunkl derivative in closed form
        return mp.diff(g, x) + k * (g(x) - g(-x)) / x

    d = abs(abs(x) - abs(y))
    return float(mp.quad(lambda t: A(t) / mp.sqrt(t), [0, d * d / 8, d * d, 10 * d * d, mp.inf]))


@pytest.mark.parametrize("x,y", [(1.0, 0.3), (0.4, -1.5), (2.0, -2.3)])
def test_time_integral_against_bessel_oracle(lab1, x, y):
    ours = float(heat_time_integral(lab1, 0, 0, np.array([[x]]), np.array([[y]]))[0])
    assert ours == pytest.approx(_mp_time_integral(1.0, x, y), rel=1e-6)


def test_time_integral_converges_under_refinement(lab2):
    x, y = np.array([[0.5, 1.2]]), np.array([[-0.9, 0.4]])
    q = TimeQuadrature(panels=256)
    a = heat_time_integral(lab2, 0, 1, x, y, q)
    b = heat_time_integral(lab2, 0, 1, x, y, q.refined())
    assert abs(a - b)[0] < 1e-9 * abs(b)[0]


def test_theta_is_linear_in_b_and_vanishes_on_constants(lab2, rng):
    b = builtin_symbol("smooth_invariant", dimension=2)
    x, y = rng.normal(size=(2, 50, 2))
    s = np.exp(rng.uniform(-2, 1, 50))
    v1 = theta_value(lab2, b, s, 0, 1, x, y)
    np.testing.assert_allclose(theta_value(lab2, b.scaled(-3.0), s, 0, 1, x, y), -3 * v1, rtol=1e-14)
    c = builtin_symbol("constant", dimension=2)
    assert np.all(theta_value(lab2, c, s, 0, 1, x, y) == 0)


def test_K_antisymmetric_for_symmetric_A(lab2, rng):
    b = builtin_symbol("smooth_invariant", dimension=2)
    x, y = rng.normal(size=(2, 10, 2)) * 1.5
    kxy = integrated_value(lab2, b, 0, 1, x, y)
    kyx = integrated_value(lab2, b, 0, 1, y, x)
    np.testing.assert_allclose(kxy, -kyx, rtol=1e-9, atol=1e-12 * np.max(np.abs(kxy)))


def test_probe_records_agree_with_vector_ratios(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    x, y = np.array([0.8]), np.array([-0.3])
    p = theta(lab1, b, 0.5, 0, 0, x, y)
    assert p.ratio == pytest.approx(float(theta_ratio(lab1, b, 0.5, 0, 0, x, y, 1.0)), rel=1e-12)
    q = integrated_kernel(lab1, b, 0, 0, x, y)
    assert q.ratio == pytest.approx(float(integrated_ratio(lab1, b, 0, 0, x[None], y[None], 1.0)[0]), rel=1e-12)
    assert set(p.row()) == {"x", "y", "scale", "value", "ratio"}


def test_size_ratios_stay_bounded(lab1, rng):
    b = builtin_symbol("smooth_invariant", dimension=1)
    x = rng.uniform(-3, 3, (400, 1))
    s = np.exp(rng.uniform(-3, 1.5, 400))
    y = x + s[:, None] * rng.normal(size=(400, 1)) * 2
    assert np.max(theta_ratio(lab1, b, s, 0, 0, x, y, 1.0)) < 10
    far = np.abs(np.abs(x) - np.abs(y))[:, 0] > 1e-2
    assert np.max(integrated_ratio(lab1, b, 0, 0, x[far][:60], y[far][:60], 1.0)) < 10


def test_regularity_preconditions(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    x, y = np.array([[1.0]]), np.array([[-0.2]])
    with pytest.raises(PreconditionViolated):
        regularity_probe(lab1, b, 0, 0, x, x + 0.6, y, "scale", 0.5)
    with pytest.raises(PreconditionViolated):
        regularity_probe(lab1, b, 0, 0, x, x + 0.3, y, "integrated")  # d = 0.8, limit 0.2
    r = regularity_probe(lab1, b, 0, 0, x, x + 0.1, y, "integrated")
    assert np.all(np.isfinite(r)) and r[0] > 0


def test_orbit_diagonal_rejected(lab1):
    b = builtin_symbol("coordinate_noninvariant", dimension=1)
    with pytest.raises(OrbitDiagonal):
        integrated_value(lab1, b, 0, 0, np.array([[1.0]]), np.array([[-1.0]]))


def test_heat_parameter_integrals(lab2):
    out = heat_parameter_integral_check(lab2, np.array([1.0, 0.5]), np.array([-0.2, 2.0]), 0.1)
    assert out["global_ratio"] > 0 and out["perturbative_ratio"] > 0
    cap = 10 * 16 ** ((lab2.spec.homogeneous_dimension + 1) / 2)
    assert out["global_ratio"] < cap and out["perturbative_ratio"] < cap
    with pytest.raises(PreconditionViolated):
        heat_parameter_integral_check(lab2, np.array([1.0, 0.5]), np.array([1.1, 0.5]), 0.1)
    # homogeneity: both ratios are dilation invariant
    lam = 3.0
    scaled = heat_parameter_integral_check(lab2, lam * np.array([1.0, 0.5]), lam * np.array([-0.2, 2.0]), 0.1 * lam)
    assert scaled["global_ratio"] == pytest.approx(out["global_ratio"], rel=1e-6)
    assert math.isfinite(scaled["perturbative_ratio"])
