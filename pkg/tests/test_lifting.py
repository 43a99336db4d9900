import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunkl_czo_lab.errors import OrbitDiagonal
from dunkl_czo_lab.geometry import build_atlas, orbit_distance, preset
from dunkl_czo_lab.lab import make_lab
from dunkl_czo_lab.lifting import (
    chamber_grid, full_grid, grid_norm, lift, lift_values, lifted_K, lifted_slice, lifted_theta,
    lifted_theta_ratio, unlift,
)
from dunkl_czo_lab.measure import coordinate_interval_mass
from dunkl_czo_lab.symbols import builtin_symbol


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.integers(0, 7), st.integers(0, 7))
def test_chamber_identity(v, rho, tau):
    atlas = build_atlas(preset("b2"))
    _, x = atlas.chamber_of(np.array(v[:2]))
    _, y = atlas.chamber_of(np.array(v[2:]))
    g = atlas.group.elements
    assert orbit_distance(atlas.group, g[rho] @ x, g[tau] @ y) == pytest.approx(np.linalg.norm(x - y), abs=1e-12)


@pytest.mark.parametrize("name", ["z2", "z2xz2", "b2"])
def test_lift_is_an_isometry_and_invertible(name):
    lab = make_lab(preset(name), validate=False)
    grid = chamber_grid(lab, 8 if lab.dimension == 2 else 40, 3.0)
    full = full_grid(lab.atlas, grid)
    f = lambda p: np.cos(p[..., 0]) * np.exp(-np.sum(p**2, axis=-1)) + p[..., -1]  # noqa: E731
    vals = f(full.nodes)
    lifted = lift_values(full, vals)
    np.testing.assert_array_equal(lifted.values, lift(lab.atlas, f, grid).values)
    np.testing.assert_array_equal(unlift(full, lifted), vals)
    for p in (1.0, 1.5, 2.0, 3.0, np.inf):
        assert lifted.norm(p) == pytest.approx(grid_norm(full.weights, vals, p), rel=1e-13)


def test_product_grid_weights_are_exact_cell_masses(lab2):
    grid = chamber_grid(lab2, 10, 2.0, margin=0.0)
    kap = lab2.spec.coordinate_kappa()
    total = coordinate_interval_mass(kap[0], 0.0, 2.0) * coordinate_interval_mass(kap[1], 0.0, 2.0)
    assert grid.weights.sum() == pytest.approx(total, rel=1e-12)


def test_lifted_slice_depends_on_relative_element(lab2):
    # for i = j the kernel is invariant under the diagonal action (mixed i != j flip sign)
    b = builtin_symbol("smooth_invariant", dimension=2)
    x, y = np.array([0.5, 1.0]), np.array([1.3, 0.2])
    sl = lifted_slice(lab2, b, 0, 0, x, y)
    g = lab2.group
    for rho in range(g.order):
        for tau in range(g.order):
            rel = g.index_of(g.elements[rho].T @ g.elements[tau])
            assert sl[rho, tau] == pytest.approx(sl[0, rel], rel=1e-10, abs=1e-14)


def test_lifted_entries_match_direct_kernel(lab2):
    b = builtin_symbol("smooth_invariant", dimension=2)
    x, y = np.array([[0.5, 1.0]]), np.array([[1.3, 0.2]])
    g = lab2.group.elements
    v = lifted_theta(lab2, b, 0.7, 1, 1, 2, 3, x, y)
    from dunkl_czo_lab.kernels import theta_value
    assert v[0] == theta_value(lab2, b, 0.7, 1, 1, x @ g[2].T, y @ g[3].T)[0]
    assert lifted_theta_ratio(lab2, b, 0.7, 1, 1, 2, 3, x, y, 1.0)[0] >= 0
    with pytest.raises(OrbitDiagonal):
        lifted_K(lab2, b, 0, 1, 0, 1, x, x)


def test_debug_mode_rechecks_chamber_identity(lab2, monkeypatch):
    import dunkl_czo_lab.lifting as lf

    b = builtin_symbol("smooth_invariant", dimension=2)
    monkeypatch.setattr(lf, "CHECK_CHAMBER_IDENTITY", True)
    x, y = np.array([[0.5, 1.0]]), np.array([[1.5, 0.2]])
    lifted_theta(lab2, b, 0.5, 0, 1, 1, 2, x, y)
    with pytest.raises(AssertionError):
        lifted_theta(lab2, b, 0.5, 0, 1, 1, 2, -x, y)  # -x is outside C


def test_volume_transfer_between_chamber_and_space(lab_b2, rng):
    from dunkl_czo_lab.measure import chamber_volume_max, volume_max

    _, x = lab_b2.atlas.chamber_of(rng.uniform(-3, 3, (10, 2)))
    _, y = lab_b2.atlas.chamber_of(rng.uniform(-3, 3, (10, 2)))
    r = 10.0 ** rng.uniform(-1, 0.5, 10)
    q = volume_max(lab_b2.measure, x, y, r) / chamber_volume_max(lab_b2.measure, lab_b2.atlas, x, y, r)
    assert np.all(q >= 1 - 1e-12) and np.all(q <= lab_b2.group.order * (1 + 1e-9))
