import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunkl_czo_lab.errors import UnknownSymbol
from dunkl_czo_lab.geometry import build_group, preset, z2n
from dunkl_czo_lab.symbols import (
    builtin_symbol, lipd_estimate, lipd_norm, mollifier_rule, mollify, shell_directions,
)


@pytest.fixture(scope="module")
def g2():
    return build_group(z2n(2, 1.0))


def test_smooth_invariant_gradient_matches_differences(rng):
    b = builtin_symbol("smooth_invariant", {"c": [1.0, 0.5]}, dimension=2)
    x = rng.normal(size=(20, 2))
    h = 1e-6
    fd = np.stack([(b(x + h * e) - b(x - h * e)) / (2 * h) for e in np.eye(2)], axis=-1)
    np.testing.assert_allclose(b.gradient(x), fd, atol=1e-8)


def test_sampled_seminorm_bounded_by_declared(g2):
    b = builtin_symbol("smooth_invariant", {"c": [1.0, 0.5]}, dimension=2)
    est = lipd_estimate(b, g2, n_pairs=20_000)
    assert not est.flagged
    assert est.value <= b.declared_lipd * (1 + 1e-9)
    assert est.value > 0.5 * b.declared_lipd


def test_orbit_distance_symbol_is_one_lipschitz(g2):
    b = builtin_symbol("orbit_dist", {"x0": [1.0, -0.5]}, dimension=2, group=g2)
    est = lipd_estimate(b, g2, n_pairs=20_000)
    assert not est.flagged
    assert 0.9 < est.value <= 1.0 + 1e-9


def test_non_invariant_symbol_is_flagged(g2):
    b = builtin_symbol("coordinate_noninvariant", dimension=2)
    est = lipd_estimate(b, g2, n_pairs=2000)
    assert est.flagged and math.isinf(est.value)
    assert est.max_orbit_violation > 1.0


def test_constant_symbol_and_declared_norm(g2):
    b = builtin_symbol("constant", {"c": 3.0}, dimension=2)
    assert lipd_norm(b, g2) == 0.0
    np.testing.assert_array_equal(b(np.zeros((4, 2))), 3.0)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        builtin_symbol("nope")


@settings(max_examples=30, deadline=None)
@given(st.floats(-4, 4), st.floats(-3, 3), st.floats(-3, 3))
def test_scaling_is_linear(lam, a, c):
    b = builtin_symbol("smooth_invariant", dimension=2)
    x = np.array([a, c])
    sb = b.scaled(lam)
    assert sb(x) == pytest.approx(lam * b(x), abs=1e-12)
    assert sb.declared_lipd == pytest.approx(abs(lam) * b.declared_lipd)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mollifier_rule_is_centred_probability(n):
    off, w = mollifier_rule(n, 0.1)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w >= 0)
    np.testing.assert_allclose(w @ off, 0.0, atol=1e-15)
    assert np.all(np.linalg.norm(off, axis=1) < 0.1)
    assert len(shell_directions(n)) % 2 == 0


def test_mollified_symbol_stays_invariant_and_close(g2):
    b = builtin_symbol("smooth_invariant", dimension=2)
    be = mollify(b, 1e-2, dimension=2)
    x = np.random.default_rng(0).normal(size=(50, 2))
    assert np.max(np.abs(be(x) - b(x))) < 1e-2 * b.declared_lipd
    assert not lipd_estimate(be, g2, n_pairs=2000).flagged
    with pytest.raises(ValueError):
        mollify(b, 0.0)


def test_lipd_on_dihedral_group():
    g = build_group(preset("i2_6"))
    b = builtin_symbol("orbit_dist", {"x0": [0.5, 0.2]}, dimension=2, group=g)
    assert not lipd_estimate(b, g, n_pairs=5000).flagged


def test_product_rule_for_invariant_symbol(rng):
    from dunkl_czo_lab.calculus import DunklOracleConfig, dunkl_apply

    spec = z2n(2, [1.0, 0.5])
    b = builtin_symbol("smooth_invariant", {"c": [1.0, 0.5]}, dimension=2)
    x = rng.uniform(0.2, 2, (1000, 2)) * rng.choice([-1, 1], (1000, 2))

    def f(p):
        return np.exp(-np.sum((p - 0.3) ** 2, axis=-1)) * (1 + p[..., 0])

    cfg = DunklOracleConfig()
    for j, e in enumerate(np.eye(2)):
        lhs = dunkl_apply(cfg, spec, lambda p: b(p) * f(p), e, x)
        rhs = b.gradient(x)[:, j] * f(x) + b(x) * dunkl_apply(cfg, spec, f, e, x)
        assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-3)) < 1e-5


def test_product_rule_fails_without_invariance(rng):
    from dunkl_czo_lab.calculus import DunklOracleConfig, dunkl_apply

    spec = z2n(1, 1.0)
    b = builtin_symbol("coordinate_noninvariant", dimension=1)
    x = rng.uniform(0.2, 2, (50, 1))
    f = lambda p: np.exp(-p[..., 0] ** 2)  # noqa: E731
    lhs = dunkl_apply(DunklOracleConfig(), spec, lambda p: b(p) * f(p), [1.0], x)
    rhs = f(x) + b(x) * dunkl_apply(DunklOracleConfig(), spec, f, [1.0], x)
    assert np.max(np.abs(lhs - rhs)) > 0.1


def test_lipschitz_comparisons(g2, rng):
    b = builtin_symbol("smooth_invariant", {"c": [1.0, 0.5]}, dimension=2)
    x, y = rng.uniform(-4, 4, (2, 5000, 2))
    diff = np.abs(b(x) - b(y))
    assert np.max(diff / np.linalg.norm(x - y, axis=1)) <= b.declared_lipd * (1 + 1e-12)
    from dunkl_czo_lab.geometry import orbit_distance
    assert np.max(diff / orbit_distance(g2, x, y)) <= b.declared_lipd * (1 + 1e-12)
