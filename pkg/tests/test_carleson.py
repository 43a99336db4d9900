import math

import numpy as np
import pytest
from scipy import integrate

from dunkl_czo_lab import carleson as ct
from dunkl_czo_lab.errors import PreconditionViolated
from dunkl_czo_lab.geometry import preset, wall_distance, z2n
from dunkl_czo_lab.lab import make_lab
from dunkl_czo_lab.symbols import builtin_symbol


@pytest.fixture(scope="module")
def lab0():
    return make_lab(z2n(1, 0.0))


def test_log_scale_grid_integrates_ds_over_s():
    s, w = ct.log_scale_grid(1e-3, 10.0, 16)
    assert w.sum() == pytest.approx(math.log(1e4), rel=1e-12)
    assert s[0] == pytest.approx(1e-3) and s[-1] == pytest.approx(10.0)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_wall_layer_slope_matches_power_law(k):
    out = ct.wall_layer_measure_check(make_lab(z2n(1, k)), [0.0], 1.0)
    assert out["slope"] == pytest.approx(2 * k + 1, abs=1e-9)


@pytest.mark.parametrize("name", ["b2", "i2_6"])
@pytest.mark.parametrize("k", [0.5, 1.0])
def test_wall_layer_slope_dihedral(name, k):
    # each wall carries two roots, so the weight vanishes like delta^(2k) across it
    lab = make_lab(preset(name, k), validate=False)
    for c in ([0.0, 0.0], [2.0, 0.5]):
        assert ct.wall_layer_measure_check(lab, c, 1.0)["slope"] == pytest.approx(2 * k + 1, abs=0.02)
    with pytest.raises(PreconditionViolated):
        ct.wall_layer_measure_check(lab, [0.0, 0.0], 1.0, lambdas=[2.0])


def test_layer_mass_against_quasi_monte_carlo(lab_b2):
    from scipy.stats import qmc
    c, r, width = np.array([1.2, 0.4]), 1.0, 0.15
    u = qmc.Sobol(2, scramble=True, seed=7).random_base2(20)
    p = c - r + 2 * r * u
    inside = (np.sum((p - c) ** 2, axis=1) < r * r) & (wall_distance(lab_b2.spec, p) <= width)
    ref = 4 * r * r * np.mean(np.prod(np.abs(p @ lab_b2.spec.roots.T), axis=1) * inside)
    assert ct.layer_mass(lab_b2, c, r, width) == pytest.approx(ref, rel=3e-3)


def test_layer_carleson_grid_agrees_with_exact_and_majorant(lab1):
    for ball in ct.ball_family(lab1, (0.3, 3.0)):
        g = ct.wall_layer_carleson(lab1, ball["center"], ball["radius"], method="grid")
        e = ct.wall_layer_carleson(lab1, ball["center"], ball["radius"], method="exact")
        assert abs(g / e - 1) < 0.05
        if ball["kind"] == "deep":
            assert e <= ct.wall_layer_majorant(lab1, ball["center"], ball["radius"]) * (1 + 1e-9)
    with pytest.raises(PreconditionViolated):
        ct.wall_layer_majorant(lab1, [0.1], 1.0)


def test_ball_family_geometry(lab_b2):
    balls = ct.ball_family(lab_b2, (1.0,))
    by_kind = {b["kind"]: b for b in balls}
    assert wall_distance(lab_b2.spec, np.array(by_kind["deep"]["center"])) == pytest.approx(3.0)
    assert wall_distance(lab_b2.spec, np.array(by_kind["adjacent"]["center"])) == pytest.approx(0.5)
    assert wall_distance(lab_b2.spec, np.array(by_kind["wall"]["center"])) == pytest.approx(0.0, abs=1e-12)


def test_gaussian_average_against_quad(lab1):
    x = 0.7
    F = lambda y: np.cos(y) ** 2  # noqa: E731
    got = float(ct.gaussian_average(lab1, 0.5, lambda p: F(p[..., 0]), np.array([[x]]))[0])
    vol = lambda c: float(np.asarray(ct.ball_volume(lab1.measure, np.array([c]), 0.5)))  # noqa: E731
    vx = vol(x)

    def integrand(y):
        d = abs(abs(x) - abs(y))
        return 2 * abs(y) ** 2 * math.exp(-d * d / (16 * 0.25)) / max(vx, vol(y)) * F(y)

    ref = sum(integrate.quad(integrand, a, b, epsabs=1e-13, limit=200)[0] for a, b in ((-14, -x), (-x, 0), (0, x), (x, 14)))
    assert got == pytest.approx(ref, rel=1e-8)


def test_gaussian_average_closed_form(lab0):
    xs = np.array([[0.0], [-1.1]])
    got = ct.gaussian_average(lab0, 1.0, lambda p: (p[..., 0] >= 0).astype(float), xs)
    from scipy.special import erf
    np.testing.assert_allclose(got, math.sqrt(math.pi) * (1 + erf(np.abs(xs[:, 0]) / 4)), rtol=1e-8)


@pytest.mark.parametrize("k", [0.0, 1.0])
def test_square_function_quarter_identity(k):
    lab = make_lab(z2n(1, k), validate=False)
    f = lambda z: np.maximum(1 - z**2, 0) ** 3 * np.cos(12 * z)  # noqa: E731
    v = ct.vertical_square_function(lab, [f], [1.0])
    assert v == pytest.approx(0.25, rel=0.05)


def test_component_testing_and_adjoint(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    balls = ct.ball_family(lab1, (0.3,), ("deep", "wall"))
    rep = ct.component_testing(lab1, b, 0, balls, per_decade=8, decades=3.0, refine=True)
    assert 0 <= rep.sup < 100 and rep.drift < 0.1
    assert set(rep.to_dict()) >= {"sup", "values", "refined_sup", "drift"}
    assert ct.adjoint_check(lab1, b, 1, 0.5, np.array([[0.4], [-1.3]])) < 1e-6


def test_gradient_carleson_annihilates_constants(lab1):
    balls = ct.ball_family(lab1, (1.0,))
    rep = ct.gradient_carleson(lab1, lambda p: np.ones(p.shape[:-1]), 1.0, balls, per_decade=4, decades=2.0)
    assert rep.sup < 1e-10


def test_commutator_identity(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    phi = lambda p: np.prod(np.maximum(1 - ((p - 1.5) / 0.5) ** 2, 0) ** 4, axis=-1)  # noqa: E731
    resid, scale = ct.commutator_identity_residual(lab1, b, 0.5, 0, 0, phi, [(1.0, 2.0)], np.array([[0.3], [1.4]]))
    assert np.max(np.abs(resid) / scale) < 1e-5
